import { describe, expect, it } from 'vitest';
import { selectorColor } from '../src/color.js';
import { renderTimeSelector } from '../src/selector.js';
import type { SelectionEcho } from '../src/types.js';

function count(svg: string, needle: string): number {
  return svg.split(needle).length - 1;
}

const windowEcho: SelectionEcho = {
  mode: 'window',
  params: { center: 2, width: 3 },
  members: [1, 2, 3],
};

describe('renderTimeSelector', () => {
  it('draws one slice per time step', () => {
    const series = [0, 0.25, 0.5, 0.75, 1, 0.1];
    const svg = renderTimeSelector(series, windowEcho);
    expect(count(svg, 'class="selector-slice"')).toBe(series.length);
    for (let t = 0; t < series.length; t++) {
      expect(svg).toContain(`data-t="${t}"`);
    }
  });

  it('boxes and numbers exactly the selected steps', () => {
    const svg = renderTimeSelector([0.1, 0.2, 0.3, 0.4, 0.5, 0.6], windowEcho);
    expect(count(svg, 'class="selector-box"')).toBe(windowEcho.members.length);
    expect(count(svg, 'class="selector-box-label"')).toBe(windowEcho.members.length);
    for (const t of windowEcho.members) {
      expect(svg).toContain(`>${t}</text>`);
    }
    expect(svg).not.toContain('>0</text>');
  });

  it('colors each slice through the ramp', () => {
    const series = [0, 0.5, 1];
    const svg = renderTimeSelector(series, null);
    for (const v of series) {
      expect(svg).toContain(`fill="${selectorColor(v)}"`);
    }
  });

  it('renders a flat series with identical fills', () => {
    const svg = renderTimeSelector([0.5, 0.5, 0.5, 0.5], null);
    expect(count(svg, `fill="${selectorColor(0.5)}"`)).toBe(4);
  });

  it('shows the period marker only in periodic mode', () => {
    const periodic: SelectionEcho = {
      mode: 'periodic',
      params: { anchor: 1, period: 3 },
      members: [1, 4],
    };
    const series = [0, 0.2, 0.4, 0.6, 0.8, 1];
    expect(renderTimeSelector(series, periodic)).toContain('class="period-marker"');
    expect(renderTimeSelector(series, windowEcho)).not.toContain('period-marker');
    expect(renderTimeSelector(series, null)).not.toContain('period-marker');
  });

  it('marks branch presence under the strip, skipping out-of-range steps', () => {
    const svg = renderTimeSelector([0.1, 0.2, 0.3], null, { marked: [1, 2, 7] });
    expect(count(svg, 'class="selector-mark"')).toBe(2);
  });

  it('falls back to an empty banner without a dataset', () => {
    const svg = renderTimeSelector([], null);
    expect(svg).toContain('selector-empty');
    expect(svg).toContain('no dataset');
    expect(svg).not.toContain('selector-slice');
  });

  it('clamps ramp inputs outside the unit interval', () => {
    expect(selectorColor(-3)).toBe(selectorColor(0));
    expect(selectorColor(9)).toBe(selectorColor(1));
    expect(selectorColor(0)).toBe('#deebf7');
    expect(selectorColor(1)).toBe('#084594');
  });
});
