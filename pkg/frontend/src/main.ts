import { ApiClient } from './api.js';
import { GameViewModel } from './viewmodel.js';
import { Renderer } from './render.js';

async function boot(): Promise<void> {
  const api = new ApiClient('');
  const vm = new GameViewModel(api);
  const picker = document.getElementById('scenario') as HTMLSelectElement;
  const seedInput = document.getElementById('seed') as HTMLInputElement;
  const startBtn = document.getElementById('start') as HTMLButtonElement;
  const root = document.getElementById('game') as HTMLElement;
  new Renderer(vm, root);

  try {
    for (const scenario of await api.listScenarios()) {
      const opt = document.createElement('option');
      opt.value = scenario.id;
      opt.textContent = `${scenario.id} - ${scenario.description}`;
      picker.appendChild(opt);
    }
  } catch (err) {
    root.textContent = `cannot reach the play service: ${String(err)}`;
    return;
  }

  startBtn.addEventListener('click', () => {
    const seedText = seedInput.value.trim();
    const seed = seedText ? Number.parseInt(seedText, 10) : undefined;
    void vm.startGame(picker.value, seed);
  });
}

void boot();
