/** Single-hue light-to-dark ramp for the selector strip. */

const LIGHT = [0xde, 0xeb, 0xf7];
const DARK = [0x08, 0x45, 0x94];

function hex2(v: number): string {
  return v.toString(16).padStart(2, '0');
}

export function selectorColor(value: number): string {
  const v = Math.min(1, Math.max(0, value));
  const channels = LIGHT.map((lo, i) => Math.round(lo + (DARK[i] - lo) * v));
  return `#${channels.map(hex2).join('')}`;
}
