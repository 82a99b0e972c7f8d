import { vi } from "vitest";
import { Catalog } from "../src/types.js";

export const CATALOG: Catalog = {
  kgs: [
    {
      name: "go",
      versions: ["2024-06-17", "2024-01-01"],
      latest: "2024-06-17",
      models: ["TransE", "DistMult"],
    },
  ],
};

export function jsonResponse(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "content-type": "application/json" },
  });
}

/** Install a fetch mock that answers by URL substring, newest rule first. */
export function mockFetch(
  rules: Array<[match: string, body: unknown, status?: number]>,
): ReturnType<typeof vi.fn> {
  const mock = vi.fn(async (input: RequestInfo | URL) => {
    const url = String(input);
    for (const [match, body, status] of rules) {
      if (url.includes(match)) {
        return jsonResponse(body, status ?? 200);
      }
    }
    throw new Error(`no mock rule for ${url}`);
  });
  vi.stubGlobal("fetch", mock);
  return mock;
}

/** A fetch whose responses are resolved manually, for ordering tests. */
export function deferredFetch(): {
  mock: ReturnType<typeof vi.fn>;
  release: (index: number, body: unknown, status?: number) => void;
} {
  const pending: Array<(response: Response) => void> = [];
  const mock = vi.fn(
    () => new Promise<Response>((resolve) => pending.push(resolve)),
  );
  vi.stubGlobal("fetch", mock);
  return {
    mock,
    release(index, body, status = 200) {
      pending[index](jsonResponse(body, status));
    },
  };
}
