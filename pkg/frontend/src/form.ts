import type { CovariateMeta, ModelSummary, PredictRequest, ScenarioRequest } from "./types.js";

export interface FormState {
  readonly root: HTMLElement;
  readonly submit: HTMLButtonElement;
  /** Current request if every covariate input is valid, else null. */
  read(): PredictRequest | null;
  onChange(listener: () => void): void;
}

function covariateInput(meta: CovariateMeta, required: boolean): HTMLElement {
  const wrapper = document.createElement("label");
  wrapper.className = "field";
  const caption = document.createElement("span");
  caption.textContent = meta.name;
  wrapper.appendChild(caption);
  let input: HTMLInputElement | HTMLSelectElement;
  if (meta.kind === "binary") {
    input = document.createElement("select");
    for (const value of required ? ["0", "1"] : ["", "0", "1"]) {
      const option = document.createElement("option");
      option.value = value;
      option.textContent = value === "" ? "(inherit)" : value;
      input.appendChild(option);
    }
  } else {
    input = document.createElement("input");
    input.type = "number";
    input.step = "any";
    input.placeholder = required ? `${meta.min} .. ${meta.max}` : "(inherit)";
    if (required) {
      input.required = true;
    }
  }
  input.name = meta.name;
  input.dataset.covariate = meta.name;
  wrapper.appendChild(input);
  return wrapper;
}

function readNumber(element: HTMLInputElement | HTMLSelectElement): number | null {
  const raw = element.value.trim();
  if (raw === "") {
    return null;
  }
  const value = Number(raw);
  return Number.isFinite(value) ? value : null;
}

/**
 * Profile form: one input per model covariate, an alpha slider, the elapsed
 * survival time, and a list of named what-if scenarios holding covariate
 * overrides. The submit button stays disabled until every base covariate is
 * valid.
 */
export function buildProfileForm(model: ModelSummary): FormState {
  const root = document.createElement("form");
  root.className = "profile-form";
  root.dataset.testid = "profile-form";
  const listeners: Array<() => void> = [];

  const covariateBox = document.createElement("fieldset");
  const legend = document.createElement("legend");
  legend.textContent = "Covariate profile";
  covariateBox.appendChild(legend);
  for (const meta of model.covariates) {
    covariateBox.appendChild(covariateInput(meta, true));
  }
  root.appendChild(covariateBox);

  const alphaLabel = document.createElement("label");
  alphaLabel.className = "field";
  alphaLabel.textContent = "miscoverage alpha ";
  const alpha = document.createElement("input");
  alpha.type = "range";
  alpha.min = "0.01";
  alpha.max = "0.5";
  alpha.step = "0.01";
  alpha.value = String(Math.min(Math.max(model.config.alpha, 0.01), 0.5));
  alpha.dataset.testid = "alpha-slider";
  const alphaValue = document.createElement("output");
  alphaValue.textContent = alpha.value;
  alpha.addEventListener("input", () => {
    alphaValue.textContent = alpha.value;
  });
  alphaLabel.appendChild(alpha);
  alphaLabel.appendChild(alphaValue);
  root.appendChild(alphaLabel);

  const clLabel = document.createElement("label");
  clLabel.className = "field";
  clLabel.textContent = "elapsed survival time ";
  const cl = document.createElement("input");
  cl.type = "number";
  cl.min = "0";
  cl.step = "any";
  cl.value = "0";
  cl.dataset.testid = "cl-input";
  clLabel.appendChild(cl);
  root.appendChild(clLabel);

  const scenarioBox = document.createElement("fieldset");
  scenarioBox.dataset.testid = "scenario-list";
  const scenarioLegend = document.createElement("legend");
  scenarioLegend.textContent = "What-if scenarios";
  scenarioBox.appendChild(scenarioLegend);
  const addScenario = document.createElement("button");
  addScenario.type = "button";
  addScenario.textContent = "add scenario";
  addScenario.dataset.testid = "add-scenario";
  scenarioBox.appendChild(addScenario);
  root.appendChild(scenarioBox);

  const scenarioRows: HTMLElement[] = [];
  addScenario.addEventListener("click", () => {
    const row = document.createElement("div");
    row.className = "scenario";
    const name = document.createElement("input");
    name.type = "text";
    name.placeholder = `scenario ${scenarioRows.length + 1}`;
    name.dataset.role = "scenario-name";
    row.appendChild(name);
    for (const meta of model.covariates) {
      row.appendChild(covariateInput(meta, false));
    }
    const remove = document.createElement("button");
    remove.type = "button";
    remove.textContent = "remove";
    remove.addEventListener("click", () => {
      scenarioRows.splice(scenarioRows.indexOf(row), 1);
      row.remove();
      notify();
    });
    row.appendChild(remove);
    scenarioRows.push(row);
    scenarioBox.appendChild(row);
    notify();
  });

  const submit = document.createElement("button");
  submit.type = "submit";
  submit.textContent = "compare intervals";
  submit.dataset.testid = "submit";
  root.appendChild(submit);

  function readBase(): Record<string, number> | null {
    const profile: Record<string, number> = {};
    for (const meta of model.covariates) {
      const input = covariateBox.querySelector<HTMLInputElement>(
        `[data-covariate="${meta.name}"]`,
      );
      const value = input ? readNumber(input) : null;
      if (value === null) {
        return null;
      }
      profile[meta.name] = value;
    }
    return profile;
  }

  function readScenarios(): ScenarioRequest[] {
    return scenarioRows.map((row, index) => {
      const overrides: Record<string, number> = {};
      for (const element of row.querySelectorAll<HTMLInputElement>("[data-covariate]")) {
        const value = readNumber(element);
        if (value !== null) {
          overrides[element.dataset.covariate as string] = value;
        }
      }
      const nameInput = row.querySelector<HTMLInputElement>('[data-role="scenario-name"]');
      const name = nameInput?.value.trim();
      return { name: name || `scenario ${index + 1}`, overrides };
    });
  }

  function read(): PredictRequest | null {
    const base = readBase();
    if (base === null) {
      return null;
    }
    const conditioning = readNumber(cl);
    if (conditioning === null || conditioning < 0) {
      return null;
    }
    return {
      covariates: base,
      alpha: Number(alpha.value),
      c_L: conditioning,
      scenarios: readScenarios(),
    };
  }

  function notify(): void {
    submit.disabled = read() === null;
    for (const listener of listeners) {
      listener();
    }
  }
  root.addEventListener("input", notify);
  notify();

  return {
    root,
    submit,
    read,
    onChange(listener: () => void): void {
      listeners.push(listener);
    },
  };
}
