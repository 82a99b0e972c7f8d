import { ApiClient } from "./client.js";
import { ClosestView } from "./closest.js";
import { DownloadView } from "./download.js";
import { SimilarityView } from "./similarity.js";

function section(id: string): HTMLElement {
  const element = document.getElementById(id);
  if (!element) {
    throw new Error(`missing #${id} container in index.html`);
  }
  return element;
}

async function boot(): Promise<void> {
  const client = new ApiClient();
  const download = new DownloadView(section("download-view"), client);
  const similarity = new SimilarityView(section("similarity-view"), client);
  const closest = new ClosestView(section("closest-view"), client);
  try {
    const catalog = await client.catalog();
    download.update(catalog);
    similarity.update(catalog);
    closest.update(catalog);
  } catch (error) {
    const banner = document.getElementById("boot-error");
    if (banner) {
      banner.hidden = false;
      banner.textContent =
        error instanceof Error ? error.message : "failed to load the catalog";
    }
  }
}

void boot();
