import { ApiClient, ApiError } from "./client.js";
import { ErrorBanner } from "./banner.js";
import { formatScore } from "./format.js";
import { RequestGate } from "./sequence.js";
import { SelectionControls } from "./selectors.js";
import { Catalog, ClosestResponse } from "./types.js";

/** Closest-concepts explorer: a query concept and k, a table of neighbours
 * in exactly the API's order, an external link per row, and row click to
 * re-query with that row's concept. */
export class ClosestView {
  readonly controls: SelectionControls;
  readonly queryInput: HTMLInputElement;
  readonly kInput: HTMLInputElement;
  readonly form: HTMLFormElement;
  readonly table: HTMLTableElement;
  readonly banner: ErrorBanner;
  readonly chooser: HTMLDivElement;
  private readonly gate = new RequestGate();

  constructor(root: HTMLElement, private readonly client: ApiClient) {
    const controlsBox = document.createElement("div");
    controlsBox.className = "controls";
    this.controls = new SelectionControls(controlsBox);
    root.appendChild(controlsBox);

    this.form = document.createElement("form");
    this.queryInput = document.createElement("input");
    this.queryInput.type = "text";
    this.queryInput.placeholder = "concept (identifier or label)";
    this.queryInput.required = true;
    this.kInput = document.createElement("input");
    this.kInput.type = "number";
    this.kInput.min = "1";
    this.kInput.max = "100";
    this.kInput.value = "10";
    const submit = document.createElement("button");
    submit.type = "submit";
    submit.textContent = "Find closest";
    this.form.append(this.queryInput, this.kInput, submit);
    this.form.onsubmit = (event) => {
      event.preventDefault();
      void this.submit();
    };
    root.appendChild(this.form);

    this.banner = new ErrorBanner(root);
    this.chooser = document.createElement("div");
    this.chooser.className = "candidate-chooser";
    root.appendChild(this.chooser);
    this.table = document.createElement("table");
    this.table.className = "closest-table";
    root.appendChild(this.table);
  }

  update(catalog: Catalog): void {
    this.controls.update(catalog);
  }

  async submit(): Promise<void> {
    const token = this.gate.begin();
    this.banner.clear();
    this.chooser.innerHTML = "";
    const { kg, model, version } = this.controls.selection();
    try {
      const response = await this.client.closest(
        kg,
        model,
        this.queryInput.value.trim(),
        Number(this.kInput.value) || 10,
        version,
      );
      if (!this.gate.isCurrent(token)) {
        return;
      }
      this.render(response);
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

  private render(response: ClosestResponse): void {
    this.table.innerHTML = "";
    const thead = document.createElement("thead");
    const head = document.createElement("tr");
    for (const title of ["iri", "label", "score", "link"]) {
      const cell = document.createElement("th");
      cell.textContent = title;
      head.appendChild(cell);
    }
    thead.appendChild(head);
    this.table.appendChild(thead);
    const body = document.createElement("tbody");
    this.table.appendChild(body);
    for (const row of response.rows) {
      const tr = document.createElement("tr");
      tr.className = "closest-row";
      tr.dataset.iri = row.iri;
      for (const text of [row.iri, row.label, formatScore(row.score)]) {
        const td = document.createElement("td");
        td.textContent = text;
        tr.appendChild(td);
      }
      const link = document.createElement("a");
      link.href = row.url;
      link.target = "_blank";
      link.rel = "noopener";
      link.textContent = "open";
      // keep link clicks from also triggering the row re-query
      link.onclick = (event) => event.stopPropagation();
      const linkCell = document.createElement("td");
      linkCell.appendChild(link);
      tr.appendChild(linkCell);
      tr.onclick = () => {
        this.queryInput.value = row.iri;
        void this.submit();
      };
      body.appendChild(tr);
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
        this.queryInput.value = candidate;
        void this.submit();
      };
      this.chooser.appendChild(button);
    }
  }
}
