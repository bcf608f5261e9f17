import { HttpApi } from './api.js';
import { ViewController } from './view.js';

export { ApiError, HttpApi } from './api.js';
export type { SelectionFlags, TfctApi } from './api.js';
export { selectorColor } from './color.js';
export { renderFct } from './fct.js';
export type { FctMode, FctOptions } from './fct.js';
export { renderTimeSelector } from './selector.js';
export type { SelectorOptions } from './selector.js';
export * from './types.js';
export { ViewController } from './view.js';
export type { TimerHost, ViewState } from './view.js';

interface MountOptions {
  baseUrl?: string;
  selectorWidth?: number;
  fctWidth?: number;
  fctHeight?: number;
}

/**
 * Attach the viewer to a host element. Renders the time selector
 * above the tree view plus a small transport bar; everything else is
 * plain event delegation on the generated SVG.
 */
export async function mountApp(host: HTMLElement, opts: MountOptions = {}): Promise<ViewController> {
  const api = new HttpApi(opts.baseUrl ?? '');
  const controller = new ViewController(api);
  await controller.load();

  const selectorDiv = document.createElement('div');
  const barDiv = document.createElement('div');
  const fctDiv = document.createElement('div');
  barDiv.innerHTML = [
    '<button data-act="back">&#9664;</button>',
    '<button data-act="play">play</button>',
    '<button data-act="fwd">&#9654;</button>',
    '<button data-act="mode">bundled</button>',
    '<span class="view-error"></span>',
  ].join(' ');
  host.append(selectorDiv, barDiv, fctDiv);

  const redraw = () => {
    selectorDiv.innerHTML = controller.selectorSvg(opts.selectorWidth);
    fctDiv.innerHTML = controller.fctSvg(opts.fctWidth, opts.fctHeight);
    const playBtn = barDiv.querySelector('[data-act="play"]') as HTMLButtonElement;
    playBtn.textContent = controller.state.playing ? 'pause' : 'play';
    const modeBtn = barDiv.querySelector('[data-act="mode"]') as HTMLButtonElement;
    modeBtn.textContent = controller.state.displayMode;
    const errSpan = barDiv.querySelector('.view-error') as HTMLSpanElement;
    errSpan.textContent = controller.state.lastError ?? '';
  };

  barDiv.addEventListener('click', async (ev) => {
    const target = ev.target as HTMLElement;
    const act = target.dataset.act;
    if (act === 'back') await controller.step(-1);
    else if (act === 'fwd') await controller.step(1);
    else if (act === 'play') controller.state.playing ? controller.pause() : controller.play();
    else if (act === 'mode') {
      controller.setDisplayMode(controller.state.displayMode === 'bundled' ? 'grouped' : 'bundled');
    }
    redraw();
  });

  selectorDiv.addEventListener('click', async (ev) => {
    const slice = (ev.target as Element).closest('[data-t]');
    if (!slice) return;
    const t = Number(slice.getAttribute('data-t'));
    await controller.select('window', { center: t, width: windowWidth(controller) });
    redraw();
  });

  fctDiv.addEventListener('mouseover', async (ev) => {
    const node = (ev.target as Element).closest('.fct-node');
    if (!node) return;
    const members = controller.state.payload?.selection.members ?? [];
    if (members.length === 0) return;
    await controller.hoverStep(members[members.length - 1]);
    redraw();
  });

  fctDiv.addEventListener('mouseout', () => {
    controller.clearHover();
    redraw();
  });

  fctDiv.addEventListener('click', async (ev) => {
    const edge = (ev.target as Element).closest('[data-child]');
    if (!edge) return;
    await controller.clickBranch(Number(edge.getAttribute('data-child')));
    redraw();
  });

  // playback mutates state between user events, so refresh on a slow tick too
  setInterval(redraw, 250);
  redraw();
  return controller;
}

function windowWidth(controller: ViewController): number {
  const echo = controller.selectionEcho();
  if (echo && echo.mode === 'window' && typeof echo.params.width === 'number') {
    return echo.params.width;
  }
  return 5;
}
