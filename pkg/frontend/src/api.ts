import type {
  BranchHighlight,
  DatasetInfo,
  GeometryPayload,
  SelectionMode,
  SelectorPayload,
  TreeHighlight,
} from './types.js';

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = 'ApiError';
  }
}

export interface SelectionFlags {
  compact_gaps?: boolean;
  equal_spacing?: boolean;
}

/** Everything the UI is allowed to ask the service. */
export interface TfctApi {
  dataset(): Promise<DatasetInfo>;
  selection(): Promise<GeometryPayload>;
  setSelection(
    mode: SelectionMode,
    params: Record<string, number | number[]>,
    flags?: SelectionFlags,
  ): Promise<GeometryPayload>;
  shiftSelection(direction: 1 | -1): Promise<GeometryPayload>;
  selector(measure: string, mode: string, window: number): Promise<SelectorPayload>;
  highlightTree(t: number): Promise<TreeHighlight>;
  highlightBranch(id: number): Promise<BranchHighlight>;
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class HttpApi implements TfctApi {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchFn(this.baseUrl + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      const code = typeof body?.code === 'string' ? body.code : 'unknown_error';
      const message = typeof body?.message === 'string' ? body.message : resp.statusText;
      throw new ApiError(resp.status, code, message);
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: 'POST',
      headers: { 'Content-Type': 'application/json' },
      body: JSON.stringify(payload),
    });
  }

  dataset(): Promise<DatasetInfo> {
    return this.request('/api/dataset');
  }

  selection(): Promise<GeometryPayload> {
    return this.request('/api/selection');
  }

  setSelection(
    mode: SelectionMode,
    params: Record<string, number | number[]>,
    flags: SelectionFlags = {},
  ): Promise<GeometryPayload> {
    return this.post('/api/selection', { mode, params, ...flags });
  }

  shiftSelection(direction: 1 | -1): Promise<GeometryPayload> {
    return this.post('/api/selection/shift', { direction });
  }

  selector(measure: string, mode: string, window: number): Promise<SelectorPayload> {
    return this.request(
      `/api/selector?measure=${encodeURIComponent(measure)}` +
        `&mode=${encodeURIComponent(mode)}&window=${window}`,
    );
  }

  highlightTree(t: number): Promise<TreeHighlight> {
    return this.request(`/api/highlight/tree/${t}`);
  }

  highlightBranch(id: number): Promise<BranchHighlight> {
    return this.request(`/api/highlight/branch/${id}`);
  }
}
