import { selectorColor } from './color.js';
import type { SelectionEcho } from './types.js';

export interface SelectorOptions {
  width?: number;
  height?: number;
  /** Steps marked by a branch click, drawn as ticks under the strip. */
  marked?: number[];
}

const STRIP_TOP = 14;

/**
 * Render the time selector as an SVG string: one colored slice per
 * time step, selected steps boxed and numbered, a period marker in
 * periodic mode. Coordinates are plain pixels; interaction is wired
 * by the host through the data-t attributes.
 */
export function renderTimeSelector(
  series: number[],
  selection: SelectionEcho | null,
  opts: SelectorOptions = {},
): string {
  const width = opts.width ?? 720;
  const height = opts.height ?? 48;
  const open = `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}"`;
  if (series.length === 0) {
    return (
      `${open} class="selector selector-empty">` +
      `<text x="${width / 2}" y="${height / 2}" text-anchor="middle">no dataset</text>` +
      '</svg>'
    );
  }

  const t_count = series.length;
  const sliceW = width / t_count;
  const stripH = height - STRIP_TOP - 10;
  const parts: string[] = [`${open} class="selector">`];

  for (let t = 0; t < t_count; t++) {
    const x = t * sliceW;
    parts.push(
      `<rect class="selector-slice" data-t="${t}" x="${x}" y="${STRIP_TOP}" ` +
        `width="${sliceW}" height="${stripH}" fill="${selectorColor(series[t])}"/>`,
    );
  }

  const members = selection ? selection.members : [];
  for (const t of members) {
    const x = t * sliceW;
    parts.push(
      `<rect class="selector-box" data-t="${t}" x="${x}" y="${STRIP_TOP}" ` +
        `width="${sliceW}" height="${stripH}" fill="none" stroke="#222222" stroke-width="1.5"/>`,
    );
    parts.push(
      `<text class="selector-box-label" x="${x + sliceW / 2}" y="${STRIP_TOP + stripH / 2}" ` +
        `text-anchor="middle" dominant-baseline="central" font-size="9">${t}</text>`,
    );
  }

  if (selection && selection.mode === 'periodic') {
    const anchor = Number(selection.params['anchor'] ?? 0);
    const period = Number(selection.params['period'] ?? 1);
    const x0 = anchor * sliceW;
    const x1 = Math.min(width, (anchor + period) * sliceW);
    const y = STRIP_TOP - 6;
    parts.push(
      '<g class="period-marker">' +
        `<line x1="${x0}" y1="${y}" x2="${x1}" y2="${y}" stroke="#c05020" stroke-width="2"/>` +
        `<line x1="${x0}" y1="${y - 4}" x2="${x0}" y2="${y + 4}" stroke="#c05020" stroke-width="2"/>` +
        `<line x1="${x1}" y1="${y - 4}" x2="${x1}" y2="${y + 4}" stroke="#c05020" stroke-width="2"/>` +
        '</g>',
    );
  }

  for (const t of opts.marked ?? []) {
    if (t < 0 || t >= t_count) continue;
    const x = t * sliceW + sliceW / 2;
    parts.push(
      `<circle class="selector-mark" data-t="${t}" cx="${x}" cy="${height - 5}" r="3" fill="#c05020"/>`,
    );
  }

  parts.push('</svg>');
  return parts.join('');
}
