import { ApiError, RequestSequencer, ServiceClient } from "./api.js";
import { renderComparison } from "./chart.js";
import { buildProfileForm } from "./form.js";
import type { ModelSummary } from "./types.js";

/** Shows a service error inline; never leaves a stale chart in place silently. */
export function renderError(container: HTMLElement, error: unknown): void {
  const box = document.createElement("p");
  box.className = "error";
  box.dataset.testid = "error-message";
  if (error instanceof ApiError) {
    box.textContent = `${error.code}: ${error.message}`;
  } else {
    box.textContent = `request failed: ${String(error)}`;
  }
  container.textContent = "";
  container.appendChild(box);
}

export class App {
  private readonly sequencer = new RequestSequencer();

  constructor(
    private readonly client: ServiceClient,
    private readonly formMount: HTMLElement,
    private readonly chartMount: HTMLElement,
  ) {}

  async start(): Promise<void> {
    let models: ModelSummary[];
    try {
      models = await this.client.listModels();
    } catch (error) {
      renderError(this.chartMount, error);
      return;
    }
    if (models.length === 0) {
      this.chartMount.textContent = "no models available; upload one through the service";
      return;
    }
    const picker = document.createElement("select");
    picker.dataset.testid = "model-picker";
    for (const model of models) {
      const option = document.createElement("option");
      option.value = model.id;
      option.textContent = `${model.id} (n=${model.training_summary.n}, ${model.config.working_model})`;
      picker.appendChild(option);
    }
    this.formMount.appendChild(picker);
    const mountForm = (model: ModelSummary) => this.mountModelForm(model);
    picker.addEventListener("change", () => {
      const chosen = models.find((m) => m.id === picker.value);
      if (chosen) {
        mountForm(chosen);
      }
    });
    const first = models[0];
    if (first) {
      mountForm(first);
    }
  }

  private mountModelForm(model: ModelSummary): void {
    this.formMount.querySelector("form")?.remove();
    const form = buildProfileForm(model);
    this.formMount.appendChild(form.root);
    form.root.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.refresh(model, form.read());
    });
    // Scenario edits re-query without a page reload.
    form.onChange(() => {
      const request = form.read();
      if (request !== null && this.chartMount.querySelector("svg") !== null) {
        void this.refresh(model, request);
      }
    });
  }

  private async refresh(
    model: ModelSummary,
    request: ReturnType<ReturnType<typeof buildProfileForm>["read"]>,
  ): Promise<void> {
    if (request === null) {
      return;
    }
    try {
      const response = await this.sequencer.submit("predict", () =>
        this.client.predict(model.id, request),
      );
      if (response === null) {
        return; // superseded by a newer submission
      }
      renderComparison(this.chartMount, response, { eta: model.training_summary.eta });
    } catch (error) {
      renderError(this.chartMount, error);
    }
  }
}

export function bootstrap(baseUrl: string, root: HTMLElement): App {
  const formMount = document.createElement("section");
  formMount.id = "form-mount";
  const chartMount = document.createElement("section");
  chartMount.id = "chart-mount";
  root.appendChild(formMount);
  root.appendChild(chartMount);
  const app = new App(new ServiceClient(baseUrl), formMount, chartMount);
  void app.start();
  return app;
}
