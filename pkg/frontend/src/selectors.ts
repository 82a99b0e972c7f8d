import { Catalog, CatalogKg, Selection } from "./types.js";

function fillOptions(select: HTMLSelectElement, values: string[], picked?: string): void {
  select.innerHTML = "";
  for (const value of values) {
    const option = document.createElement("option");
    option.value = value;
    option.textContent = value;
    select.appendChild(option);
  }
  if (picked && values.includes(picked)) {
    select.value = picked;
  } else if (values.length > 0) {
    select.value = values[0];
  }
}

/** kg/model/version selects driven by the catalog; model and version lists
 * always reflect the currently selected kg, never values the store does
 * not actually hold. */
export class SelectionControls {
  readonly kgSelect: HTMLSelectElement;
  readonly modelSelect: HTMLSelectElement;
  readonly versionSelect: HTMLSelectElement;
  private catalog: Catalog = { kgs: [] };
  onchange: () => void = () => undefined;

  constructor(parent: HTMLElement) {
    this.kgSelect = this.addSelect(parent, "kg");
    this.modelSelect = this.addSelect(parent, "model");
    this.versionSelect = this.addSelect(parent, "version");
    this.kgSelect.onchange = () => {
      this.syncToKg();
      this.onchange();
    };
    this.modelSelect.onchange = () => this.onchange();
    this.versionSelect.onchange = () => this.onchange();
  }

  private addSelect(parent: HTMLElement, name: string): HTMLSelectElement {
    const label = document.createElement("label");
    label.textContent = `${name} `;
    const select = document.createElement("select");
    select.name = name;
    label.appendChild(select);
    parent.appendChild(label);
    return select;
  }

  update(catalog: Catalog): void {
    this.catalog = catalog;
    fillOptions(this.kgSelect, catalog.kgs.map((kg) => kg.name), this.kgSelect.value);
    this.syncToKg();
  }

  private currentKg(): CatalogKg | undefined {
    return this.catalog.kgs.find((kg) => kg.name === this.kgSelect.value);
  }

  private syncToKg(): void {
    const kg = this.currentKg();
    fillOptions(this.modelSelect, kg ? kg.models : [], this.modelSelect.value);
    fillOptions(this.versionSelect, kg ? kg.versions : [], kg?.latest);
  }

  get empty(): boolean {
    return this.catalog.kgs.length === 0;
  }

  selection(): Selection {
    return {
      kg: this.kgSelect.value,
      model: this.modelSelect.value,
      version: this.versionSelect.value,
    };
  }
}
