import { ApiClient, ApiError } from "./client.js";
import { ErrorBanner } from "./banner.js";
import { formatScore } from "./format.js";
import { RequestGate } from "./sequence.js";
import { SelectionControls } from "./selectors.js";
import { Catalog } from "./types.js";

/** Similarity form: two concepts in (identifier or label), one cosine score
 * out, rendered exactly as the API reported it.  An ambiguous label (409)
 * becomes a click-to-pick candidate list. */
export class SimilarityView {
  readonly controls: SelectionControls;
  readonly inputA: HTMLInputElement;
  readonly inputB: HTMLInputElement;
  readonly form: HTMLFormElement;
  readonly result: HTMLParagraphElement;
  readonly chooser: HTMLDivElement;
  readonly banner: ErrorBanner;
  private readonly gate = new RequestGate();

  constructor(root: HTMLElement, private readonly client: ApiClient) {
    const controlsBox = document.createElement("div");
    controlsBox.className = "controls";
    this.controls = new SelectionControls(controlsBox);
    root.appendChild(controlsBox);

    this.form = document.createElement("form");
    this.inputA = this.addInput("first concept");
    this.inputB = this.addInput("second concept");
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Compare";
    this.form.appendChild(submit);
    this.form.onsubmit = (event) => {
      event.preventDefault();
      void this.submit();
    };
    root.appendChild(this.form);

    this.banner = new ErrorBanner(root);
    this.result = document.createElement("p");
    this.result.className = "similarity-score";
    root.appendChild(this.result);
    this.chooser = document.createElement("div");
    this.chooser.className = "candidate-chooser";
    root.appendChild(this.chooser);
  }

  private addInput(placeholder: string): HTMLInputElement {
    const input = document.createElement("input");
    input.type = "text";
    input.placeholder = placeholder;
    input.required = true;
    this.form.appendChild(input);
    return input;
  }

  update(catalog: Catalog): void {
    this.controls.update(catalog);
  }

  async submit(): Promise<void> {
    const token = this.gate.begin();
    this.banner.clear();
    this.chooser.innerHTML = "";
    this.result.textContent = "";
    const { kg, model, version } = this.controls.selection();
    try {
      const response = await this.client.similarity(
        kg,
        model,
        this.inputA.value.trim(),
        this.inputB.value.trim(),
        version,
      );
      if (!this.gate.isCurrent(token)) {
        return;
      }
      this.result.textContent = `cosine(${response.a}, ${response.b}) = ${formatScore(response.score)}`;
      this.result.dataset.score = formatScore(response.score);
    } catch (error) {
      if (!this.gate.isCurrent(token)) {
        return;
      }
      if (error instanceof ApiError && error.status === 409 && error.candidates) {
        this.renderChooser(error);
        return;
      }
      this.banner.show(error instanceof Error ? error.message : String(error));
    }
  }

  private renderChooser(error: ApiError): void {
    const heading = document.createElement("p");
    heading.textContent = `"${error.label ?? ""}" matches several concepts - pick one:`;
    this.chooser.appendChild(heading);
    for (const candidate of error.candidates ?? []) {
      const button = document.createElement("button");
      button.type = "button";
      button.className = "candidate";
      button.textContent = candidate;
      button.onclick = () => {
        const target = this.ambiguousInput(error.label);
        target.value = candidate;
        void this.submit();
      };
      this.chooser.appendChild(button);
    }
  }

  private ambiguousInput(label: string | undefined): HTMLInputElement {
    const wanted = (label ?? "").trim().toLowerCase();
    if (this.inputB.value.trim().toLowerCase() === wanted) {
      return this.inputB;
    }
    return this.inputA;
  }
}
