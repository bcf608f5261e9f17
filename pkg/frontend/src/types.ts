/** Payload shapes mirroring the service's JSON responses. */

export type SelectionMode = 'window' | 'multi' | 'periodic';

export interface SelectionEcho {
  mode: SelectionMode;
  params: Record<string, number | number[]>;
  members: number[];
}

export interface GeometrySelection extends SelectionEcho {
  compact_gaps: boolean;
  equal_spacing: boolean;
}

export interface BranchInfo {
  id: number;
  parent: number | null;
  x: number;
  side: number;
  order_key: number;
  present_at: number[];
}

export interface NodeInfo {
  id: number;
  parent: number | null;
  x: number;
  y: number;
  value: number;
  frequency: number;
  color_key: number;
  color: string | null;
  members: number[];
  branch: number;
}

export type Point = [number, number];

export interface BundledEdge {
  child: number;
  parent: number;
  frequency: number;
  opacity: number;
  points: Point[];
  members: number[];
}

export interface MemberNode {
  id: number;
  member: number;
  x: number;
  y: number;
  value: number;
  kind: string;
}

export interface MemberEdge {
  child: number;
  parent: number;
  points: Point[];
}

export interface MemberLayout {
  t: number;
  nodes: MemberNode[];
  edges: MemberEdge[];
}

export interface GeometryPayload {
  selection: GeometrySelection;
  value_range: [number, number];
  branches: BranchInfo[];
  nodes: NodeInfo[];
  edges: BundledEdge[];
  members: MemberLayout[];
}

export interface DatasetInfo {
  steps: number;
  width: number;
  height: number;
  labels: string[];
  value_range: [number, number];
  selection: SelectionEcho;
}

export interface SelectorPayload {
  measure: string;
  mode: string;
  window: number;
  values: number[];
  raw: number[];
}

export type TreeHighlight =
  | { kind: 'full'; t: number; member: MemberLayout }
  | { kind: 'branches'; t: number; branches: number[] };

export interface BranchHighlight {
  branch: number;
  present_at: number[];
}
