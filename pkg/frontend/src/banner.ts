/** Dismissible error banner; one per view, cleared on every new request. */
export class ErrorBanner {
  readonly element: HTMLDivElement;
  private readonly text: HTMLSpanElement;

  constructor(parent: HTMLElement) {
    this.element = document.createElement("div");
    this.element.className = "error-banner";
    this.element.hidden = true;
    this.text = document.createElement("span");
    const dismiss = document.createElement("button");
    dismiss.type = "button";
    dismiss.className = "dismiss";
    dismiss.textContent = "dismiss";
    dismiss.onclick = () => this.clear();
    this.element.append(this.text, dismiss);
    parent.appendChild(this.element);
  }

  show(message: string): void {
    this.text.textContent = message;
    this.element.hidden = false;
  }

  clear(): void {
    this.text.textContent = "";
    this.element.hidden = true;
  }
}
