import { ApiClient } from "./api.js";
import {
  renderControlPanel,
  renderErrorBanner,
  renderMatrixView,
  renderSelectionBar,
  renderSummary,
  renderTextView,
} from "./dom.js";
import { ExplorerController, ViewKind } from "./state.js";

function mount(id: string): HTMLElement {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing mount point #${id}`);
  return node;
}

async function boot(): Promise<void> {
  const api = new ApiClient((url, init) => fetch(url, init));
  const metadata = await api.getMetadata();
  const controller = new ExplorerController(api, metadata);

  const controls = mount("controls");
  const summary = mount("summary");
  const result = mount("result");
  const selection = mount("selection");
  const errors = mount("errors");
  const tabs = document.querySelectorAll<HTMLButtonElement>("[data-view]");

  controller.subscribe((state) => {
    renderControlPanel(controls, controller, state);
    renderErrorBanner(errors, controller, state);
    renderSelectionBar(selection, controller, state);
    tabs.forEach((tab) => {
      tab.classList.toggle("active", tab.dataset.view === state.view);
    });
    if (state.evaluation) {
      renderSummary(summary, state.evaluation);
      if (state.view === "matrix") renderMatrixView(result, state.evaluation);
      else renderTextView(result, state.evaluation);
    }
  });

  tabs.forEach((tab) => {
    tab.addEventListener("click", () => {
      void controller.setView(tab.dataset.view as ViewKind);
    });
  });

  await controller.init();
}

void boot().catch((error) => {
  const node = document.getElementById("errors");
  if (node) node.textContent = `Failed to start the explorer: ${error}`;
});
