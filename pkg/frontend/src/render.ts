import type { GameViewModel } from './viewmodel.js';
import type { MoveDoc } from './types.js';

const MARKS = ['', 'R', 'H'];

function el(tag: string, cls?: string, text?: string): HTMLElement {
  const node = document.createElement(tag);
  if (cls) node.className = cls;
  if (text !== undefined) node.textContent = text;
  return node;
}

/** Paints the whole page from the view model on every change. */
export class Renderer {
  constructor(
    private readonly vm: GameViewModel,
    private readonly root: HTMLElement,
  ) {
    vm.onChange(() => this.render());
  }

  render(): void {
    const vm = this.vm;
    this.root.replaceChildren();
    if (vm.lastError) {
      const banner = el('div', 'banner error', vm.lastError);
      const retry = el('button', 'retry', 'dismiss');
      retry.addEventListener('click', () => {
        vm.lastError = null;
        void vm.refresh();
      });
      banner.appendChild(retry);
      this.root.appendChild(banner);
    }
    if (!vm.state) return;

    const status = el('div', 'status');
    status.appendChild(el('span', 'turn', vm.state.terminal
      ? 'game over'
      : `${vm.state.controller}'s turn`));
    status.appendChild(el('span', 'value', `win probability ${vm.valueReadout}`));
    this.root.appendChild(status);

    const banner = vm.terminalBanner;
    if (banner) this.root.appendChild(el('div', 'banner result', banner));

    if (vm.state.state.board) {
      this.root.appendChild(this.renderBoard(vm.state.state.board));
    } else if (vm.state.state.arrangement) {
      this.root.appendChild(this.renderArrangement(vm.state.state.arrangement));
    }

    if (vm.isRobotTurn) {
      const btn = el('button', 'robot-step', 'let the robot move');
      btn.addEventListener('click', () => void vm.advanceRobot());
      this.root.appendChild(btn);
      if (vm.state.robot_actions) {
        const list = el('ul', 'robot-actions');
        for (const entry of vm.state.robot_actions) {
          list.appendChild(
            el('li', undefined, `${entry.action}: ${entry.expected_value.toFixed(4)}`),
          );
        }
        this.root.appendChild(list);
      }
    }

    if (vm.overlay) {
      const box = el('div', 'overlay-total',
        `outcomes for ${vm.overlay.action}: ${vm.overlay.totalPercent.toFixed(1)}%`);
      this.root.appendChild(box);
    }

    this.root.appendChild(this.renderHistory());
  }

  private renderBoard(board: number[]): HTMLElement {
    const vm = this.vm;
    const grid = el('div', 'board');
    const overlayByCell = new Map<number, string>();
    if (vm.overlay) {
      for (const entry of vm.overlay.entries) {
        if (entry.delta && 'cell' in entry.delta) {
          overlayByCell.set(entry.delta.cell, entry.percent);
        }
      }
    }
    const history = vm.state?.history ?? [];
    const last = history[history.length - 1];
    const landedCell =
      last?.delta && 'cell' in last.delta ? last.delta.cell : null;
    board.forEach((mark, cell) => {
      const cellEl = el('div', `cell${mark ? ' taken' : ''}`, MARKS[mark]);
      if (cell === landedCell) cellEl.classList.add('landed');
      const action = `place(${cell})`;
      const legal = vm.moves.some((m) => m.action === action);
      if (legal) {
        cellEl.classList.add('legal');
        cellEl.addEventListener('mouseenter', () => vm.hoverMove(action));
        cellEl.addEventListener('mouseleave', () => vm.clearOverlay());
        cellEl.addEventListener('click', () => void vm.commitMove(action));
      }
      const pct = overlayByCell.get(cell);
      if (pct) cellEl.appendChild(el('span', 'pct', pct));
      grid.appendChild(cellEl);
    });
    return grid;
  }

  private renderArrangement(arrangement: Record<string, string>): HTMLElement {
    const vm = this.vm;
    const wrap = el('div', 'arrangement');
    const table = el('table', 'placements');
    for (const [obj, loc] of Object.entries(arrangement)) {
      const row = el('tr');
      row.appendChild(el('td', 'obj', obj));
      row.appendChild(el('td', 'loc', loc));
      table.appendChild(row);
    }
    wrap.appendChild(table);
    if (vm.isHumanTurn && vm.moves.length) {
      wrap.appendChild(this.renderMovePicker(vm.moves));
    }
    return wrap;
  }

  private renderMovePicker(moves: MoveDoc[]): HTMLElement {
    const vm = this.vm;
    const list = el('div', 'move-picker');
    for (const move of moves) {
      const btn = el('button', 'move', move.action);
      btn.addEventListener('mouseenter', () => vm.hoverMove(move.action));
      btn.addEventListener('mouseleave', () => vm.clearOverlay());
      btn.addEventListener('click', () => void vm.commitMove(move.action));
      list.appendChild(btn);
    }
    return list;
  }

  private renderHistory(): HTMLElement {
    const wrap = el('div', 'history');
    wrap.appendChild(el('h3', undefined, 'history'));
    const list = el('ol');
    for (const entry of this.vm.state?.history ?? []) {
      let text = `${entry.actor}: ${entry.action}`;
      if (entry.delta && 'cell' in entry.delta) {
        text += ` -> cell ${entry.delta.cell}`; // landing may differ from aim
      } else if (entry.delta && 'object' in entry.delta) {
        text += ` -> ${entry.delta.object} to ${entry.delta.to}`;
      }
      list.appendChild(el('li', undefined, text));
    }
    wrap.appendChild(list);
    return wrap;
  }
}
