import { ApiClient } from "./client.js";
import { SelectionControls } from "./selectors.js";
import { Catalog } from "./types.js";

/** Download page: pick kg/model/version, fetch the vectors.json artifact
 * through the documented download URL. */
export class DownloadView {
  readonly controls: SelectionControls;
  readonly link: HTMLAnchorElement;
  readonly hint: HTMLParagraphElement;

  constructor(root: HTMLElement, private readonly client: ApiClient) {
    const form = document.createElement("div");
    form.className = "controls";
    this.controls = new SelectionControls(form);
    root.appendChild(form);

    this.link = document.createElement("a");
    this.link.className = "download-button";
    this.link.textContent = "Download vectors.json";
    root.appendChild(this.link);

    this.hint = document.createElement("p");
    this.hint.className = "hint";
    this.hint.hidden = true;
    this.hint.textContent = "Nothing published yet: the store holds no embedding versions.";
    root.appendChild(this.hint);

    this.controls.onchange = () => this.sync();
  }

  update(catalog: Catalog): void {
    this.controls.update(catalog);
    this.sync();
  }

  private sync(): void {
    if (this.controls.empty) {
      this.link.removeAttribute("href");
      this.link.setAttribute("aria-disabled", "true");
      this.hint.hidden = false;
      return;
    }
    const { kg, model, version } = this.controls.selection();
    this.link.href = this.client.downloadUrl(kg, model, version);
    this.link.setAttribute("download", `${kg}-${version}-${model}.json`);
    this.link.removeAttribute("aria-disabled");
    this.hint.hidden = true;
  }
}
