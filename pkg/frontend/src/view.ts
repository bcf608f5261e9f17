import { ApiError, type SelectionFlags, type TfctApi } from './api.js';
import { renderFct, type FctMode } from './fct.js';
import { renderTimeSelector } from './selector.js';
import type {
  DatasetInfo,
  GeometryPayload,
  SelectionEcho,
  SelectionMode,
  SelectorPayload,
  TreeHighlight,
} from './types.js';

export interface TimerHost {
  setInterval(fn: () => void, ms: number): unknown;
  clearInterval(handle: unknown): void;
}

const realTimers: TimerHost = {
  setInterval: (fn, ms) => globalThis.setInterval(fn, ms),
  clearInterval: (handle) => globalThis.clearInterval(handle as ReturnType<typeof setInterval>),
};

export interface ViewState {
  dataset: DatasetInfo | null;
  payload: GeometryPayload | null;
  series: SelectorPayload | null;
  overlay: TreeHighlight | null;
  markedSteps: number[];
  displayMode: FctMode;
  playing: boolean;
  playIntervalMs: number;
  boundaryReached: boolean;
  lastError: string | null;
}

/**
 * Client-side state machine between the service API and the two
 * renderers. Selection requests never overlap: while one is in
 * flight, later selection clicks coalesce to the newest, and the
 * playback timer skips its tick.
 */
export class ViewController {
  readonly state: ViewState = {
    dataset: null,
    payload: null,
    series: null,
    overlay: null,
    markedSteps: [],
    displayMode: 'bundled',
    playing: false,
    playIntervalMs: 800,
    boundaryReached: false,
    lastError: null,
  };

  private timer: unknown = null;
  private inFlight = false;
  private queuedSelection: (() => Promise<GeometryPayload>) | null = null;

  constructor(
    private readonly api: TfctApi,
    private readonly timers: TimerHost = realTimers,
  ) {}

  async load(measure = 'degree', seriesMode = 'direct', window = 5): Promise<void> {
    this.state.dataset = await this.api.dataset();
    this.state.payload = await this.api.selection();
    await this.refreshSelector(measure, seriesMode, window);
  }

  async refreshSelector(measure: string, seriesMode: string, window: number): Promise<void> {
    try {
      this.state.series = await this.api.selector(measure, seriesMode, window);
    } catch (err) {
      this.surface(err);
    }
  }

  select(
    mode: SelectionMode,
    params: Record<string, number | number[]>,
    flags?: SelectionFlags,
  ): Promise<void> {
    return this.runSelection(() => this.api.setSelection(mode, params, flags));
  }

  step(direction: 1 | -1): Promise<void> {
    return this.shiftOnce(direction);
  }

  play(): void {
    if (this.state.playing) return;
    this.state.playing = true;
    this.state.boundaryReached = false;
    this.timer = this.timers.setInterval(() => {
      void this.shiftOnce(1);
    }, this.state.playIntervalMs);
  }

  pause(): void {
    this.state.playing = false;
    if (this.timer !== null) {
      this.timers.clearInterval(this.timer);
      this.timer = null;
    }
  }

  setPlayInterval(ms: number): void {
    this.state.playIntervalMs = ms;
    if (this.state.playing) {
      this.pause();
      this.play();
    }
  }

  setDisplayMode(mode: FctMode): void {
    this.state.displayMode = mode;
  }

  async hoverStep(t: number): Promise<void> {
    try {
      this.state.overlay = await this.api.highlightTree(t);
    } catch (err) {
      this.surface(err);
    }
  }

  clearHover(): void {
    this.state.overlay = null;
  }

  async clickBranch(id: number): Promise<void> {
    try {
      const highlight = await this.api.highlightBranch(id);
      this.state.markedSteps = highlight.present_at;
    } catch (err) {
      this.surface(err);
    }
  }

  clearMarks(): void {
    this.state.markedSteps = [];
  }

  /** Selection echo the selector must mirror. */
  selectionEcho(): SelectionEcho | null {
    if (this.state.payload) return this.state.payload.selection;
    return this.state.dataset ? this.state.dataset.selection : null;
  }

  selectorSvg(width?: number, height?: number): string {
    return renderTimeSelector(this.state.series ? this.state.series.values : [], this.selectionEcho(), {
      width,
      height,
      marked: this.state.markedSteps,
    });
  }

  fctSvg(width?: number, height?: number): string {
    if (!this.state.payload) {
      return '<svg xmlns="http://www.w3.org/2000/svg" class="fct fct-empty"></svg>';
    }
    return renderFct(this.state.payload, this.state.displayMode, {
      width,
      height,
      highlight: this.state.overlay,
    });
  }

  private async runSelection(request: () => Promise<GeometryPayload>): Promise<void> {
    if (this.inFlight) {
      this.queuedSelection = request;
      return;
    }
    this.inFlight = true;
    try {
      this.state.payload = await request();
      this.state.boundaryReached = false;
      this.state.lastError = null;
    } catch (err) {
      this.surface(err);
    } finally {
      this.inFlight = false;
    }
    await this.drainQueue();
  }

  private async shiftOnce(direction: 1 | -1): Promise<void> {
    if (this.inFlight) return;
    this.inFlight = true;
    try {
      this.state.payload = await this.api.shiftSelection(direction);
      this.state.boundaryReached = false;
    } catch (err) {
      if (err instanceof ApiError && err.status === 409) {
        this.state.boundaryReached = true;
        if (this.state.playing) this.pause();
      } else {
        this.surface(err);
      }
    } finally {
      this.inFlight = false;
    }
    await this.drainQueue();
  }

  private async drainQueue(): Promise<void> {
    const next = this.queuedSelection;
    this.queuedSelection = null;
    if (next) await this.runSelection(next);
  }

  private surface(err: unknown): void {
    this.state.lastError = err instanceof Error ? err.message : String(err);
  }
}
