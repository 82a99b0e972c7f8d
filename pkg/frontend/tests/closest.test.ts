import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient } from "../src/client.js";
import { ClosestView } from "../src/closest.js";
import { CATALOG, deferredFetch, mockFetch } from "./helpers.js";

let root: HTMLElement;

beforeEach(() => {
  document.body.innerHTML = "<div id='root'></div>";
  root = document.getElementById("root") as HTMLElement;
});

afterEach(() => vi.unstubAllGlobals());

function makeView(): ClosestView {
  const view = new ClosestView(root, new ApiClient());
  view.update(CATALOG);
  return view;
}

function closestBody(query: string, iris: string[], k = 10) {
  return {
    kg: "go",
    version: "2024-06-17",
    model: "TransE",
    query,
    k,
    rows: iris.map((iri, i) => ({
      iri,
      label: `label of ${iri}`,
      score: 0.9 - i * 0.1,
      url: `http://purl.obolibrary.org/obo/${iri.replace(":", "_")}`,
    })),
  };
}

describe("ClosestView", () => {
  it("renders rows in exactly the API order", async () => {
    // deliberately not sorted by anything alphabetical
    mockFetch([["/api/v1/closest", closestBody("GO:1", ["GO:9", "GO:2", "GO:5"])]]);
    const view = makeView();
    view.queryInput.value = "GO:1";
    await view.submit();
    const cells = view.table.querySelectorAll("tbody tr td:first-child");
    expect([...cells].map((c) => c.textContent)).toEqual(["GO:9", "GO:2", "GO:5"]);
    const scores = view.table.querySelectorAll("tbody tr td:nth-child(3)");
    expect([...scores].map((c) => c.textContent)).toEqual(["0.9000", "0.8000", "0.7000"]);
  });

  it("renders k rows and an external link per row", async () => {
    mockFetch([["k=3", closestBody("GO:1", ["GO:2", "GO:3", "GO:4"], 3)]]);
    const view = makeView();
    view.queryInput.value = "GO:1";
    view.kInput.value = "3";
    await view.submit();
    const rows = view.table.querySelectorAll("tbody tr");
    expect(rows.length).toBe(3);
    const link = rows[0].querySelector("a") as HTMLAnchorElement;
    expect(link.href).toBe("http://purl.obolibrary.org/obo/GO_2");
    expect(link.target).toBe("_blank");
  });

  it("row click re-queries with that row's concept", async () => {
    const mock = mockFetch([
      ["q=GO%3A9", closestBody("GO:9", ["GO:1", "GO:4"])],
      ["/api/v1/closest", closestBody("GO:1", ["GO:9", "GO:2"])],
    ]);
    const view = makeView();
    view.queryInput.value = "GO:1";
    await view.submit();
    const firstRow = view.table.querySelector("tbody tr") as HTMLTableRowElement;
    expect(firstRow.dataset.iri).toBe("GO:9");

    firstRow.click();
    expect(view.queryInput.value).toBe("GO:9");
    await vi.waitFor(() => {
      const cells = view.table.querySelectorAll("tbody tr td:first-child");
      expect([...cells].map((c) => c.textContent)).toEqual(["GO:1", "GO:4"]);
    });
    expect(mock.mock.calls.length).toBe(2);
    expect(String(mock.mock.calls[1][0])).toContain("q=GO%3A9");
  });

  it("shows a chooser on ambiguous queries", async () => {
    mockFetch([
      [
        "/api/v1/closest",
        {
          code: "ambiguous_label",
          message: "label 'ion' is ambiguous: GO:3, GO:6",
          label: "ion",
          candidates: ["GO:3", "GO:6"],
        },
        409,
      ],
    ]);
    const view = makeView();
    view.queryInput.value = "ion";
    await view.submit();
    const buttons = view.chooser.querySelectorAll("button.candidate");
    expect(buttons.length).toBe(2);
  });

  it("drops a stale closest response", async () => {
    const { release } = deferredFetch();
    const view = makeView();
    view.queryInput.value = "GO:1";
    const first = view.submit();
    view.queryInput.value = "GO:2";
    const second = view.submit();
    release(1, closestBody("GO:2", ["GO:8"]));
    await second;
    release(0, closestBody("GO:1", ["GO:5"]));
    await first;
    const cells = view.table.querySelectorAll("tbody tr td:first-child");
    expect([...cells].map((c) => c.textContent)).toEqual(["GO:8"]);
  });

  it("surfaces API failures in the banner", async () => {
    mockFetch([
      ["/api/v1/closest", { code: "zero_vector", message: "vector has zero norm" }, 500],
    ]);
    const view = makeView();
    view.queryInput.value = "GO:1";
    await view.submit();
    expect(view.banner.element.hidden).toBe(false);
    expect(view.banner.element.textContent).toContain("zero norm");
  });
});
