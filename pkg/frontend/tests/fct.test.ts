import { describe, expect, it } from 'vitest';
import { renderFct } from '../src/fct.js';
import { makeGeometry } from './stub.js';

function count(svg: string, needle: string): number {
  return svg.split(needle).length - 1;
}

const threeStep = makeGeometry('window', { center: 2, width: 3 }, [1, 2, 3]);

describe('renderFct bundled', () => {
  it('draws one path per bundled edge with the server opacity verbatim', () => {
    const svg = renderFct(threeStep, 'bundled');
    expect(svg).toContain('class="fct fct-bundled"');
    expect(count(svg, 'class="fct-edge"')).toBe(threeStep.edges.length);
    for (const e of threeStep.edges) {
      expect(svg).toContain(`stroke-opacity="${e.opacity}"`);
    }
    // branch 20 exists in one of three members
    expect(svg).toContain('stroke-opacity="0.3333333333333333"');
  });

  it('keeps opacity exact for a half-present branch', () => {
    const svg = renderFct(makeGeometry('multi', { steps: [1, 2] }, [1, 2]), 'bundled');
    expect(svg).toContain('stroke-opacity="0.5"');
  });

  it('uses full opacity when every edge spans the whole selection', () => {
    const svg = renderFct(makeGeometry('multi', { steps: [2] }, [2]), 'bundled');
    expect(count(svg, 'stroke-opacity="1"')).toBe(2);
  });

  it('colors nodes from the payload, falling back when unset', () => {
    const svg = renderFct(threeStep, 'bundled');
    expect(svg).toContain('fill="#1b6f9a"');
    expect(svg).toContain('fill="#999999"');
    expect(svg).toContain('fill="#333333"');
    expect(count(svg, 'class="fct-node"')).toBe(threeStep.nodes.length);
  });
});

describe('renderFct grouped', () => {
  it('superimposes every member at a uniform share', () => {
    const svg = renderFct(threeStep, 'grouped');
    expect(svg).toContain('class="fct fct-grouped"');
    expect(count(svg, 'class="fct-member"')).toBe(3);
    const share = 1 / 3;
    expect(count(svg, `stroke-opacity="${share}"`)).toBe(
      threeStep.members.reduce((acc, m) => acc + m.edges.length, 0),
    );
    expect(svg).not.toContain('class="fct-edge"');
  });

  it('draws a single member fully opaque', () => {
    const svg = renderFct(makeGeometry('multi', { steps: [2] }, [2]), 'grouped');
    expect(count(svg, 'class="fct-member"')).toBe(1);
    expect(count(svg, 'stroke-opacity="1"')).toBe(2);
  });
});

describe('renderFct overlays', () => {
  it('draws the full member tree when hovering a selected step', () => {
    const member = threeStep.members.find((m) => m.t === 2)!;
    const svg = renderFct(threeStep, 'bundled', {
      highlight: { kind: 'full', t: 2, member },
    });
    expect(svg).toContain('fct-overlay-full');
    expect(count(svg, 'class="overlay-member-edge"')).toBe(member.edges.length);
    expect(count(svg, 'class="overlay-member-node"')).toBe(member.nodes.length);
  });

  it('boxes only branches present in the payload for branch overlays', () => {
    const svg = renderFct(threeStep, 'bundled', {
      highlight: { kind: 'branches', t: 0, branches: [20, 999] },
    });
    expect(count(svg, 'class="overlay-branch"')).toBe(1);
    expect(svg).toContain('data-branch="20"');
  });

  it('accepts a branch highlight payload directly', () => {
    const svg = renderFct(threeStep, 'grouped', {
      highlight: { branch: 10, present_at: [0, 1, 2, 3, 4, 5] },
    });
    expect(svg).toContain('fct-overlay-branches');
    expect(svg).toContain('data-branch="10"');
  });

  it('omits overlays by default', () => {
    expect(renderFct(threeStep, 'bundled')).not.toContain('fct-overlay');
  });
});

describe('renderFct geometry handling', () => {
  it('is a pure function of payload and mode', () => {
    const a = renderFct(threeStep, 'bundled', { width: 640, height: 400 });
    const b = renderFct(threeStep, 'bundled', { width: 640, height: 400 });
    expect(a).toBe(b);
  });

  it('places node circles inside the viewport', () => {
    const svg = renderFct(threeStep, 'bundled', { width: 640, height: 400 });
    const centers = [...svg.matchAll(/cx="([-\d.]+)" cy="([-\d.]+)"/g)];
    expect(centers.length).toBe(threeStep.nodes.length);
    for (const [, cx, cy] of centers) {
      expect(Number(cx)).toBeGreaterThanOrEqual(0);
      expect(Number(cx)).toBeLessThanOrEqual(640);
      expect(Number(cy)).toBeGreaterThanOrEqual(0);
      expect(Number(cy)).toBeLessThanOrEqual(400);
    }
  });
});
