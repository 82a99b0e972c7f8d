import { Catalog, ClosestResponse, ErrorBody, SimilarityResponse } from "./types.js";

export class ApiError extends Error {
  readonly status: number;
  readonly code: string;
  readonly label?: string;
  readonly candidates?: string[];

  constructor(status: number, body: ErrorBody) {
    super(body.message);
    this.name = "ApiError";
    this.status = status;
    this.code = body.code;
    this.label = body.label;
    this.candidates = body.candidates;
  }
}

async function toApiError(response: Response): Promise<ApiError> {
  let body: ErrorBody;
  try {
    body = (await response.json()) as ErrorBody;
  } catch {
    body = { code: "http_error", message: `request failed (${response.status})` };
  }
  return new ApiError(response.status, body);
}

/** Typed client over the documented /api/v1 endpoints; no math client-side. */
export class ApiClient {
  constructor(readonly base: string = "") {}

  private async getJson<T>(path: string): Promise<T> {
    const response = await fetch(this.base + path);
    if (!response.ok) {
      throw await toApiError(response);
    }
    return (await response.json()) as T;
  }

  catalog(): Promise<Catalog> {
    return this.getJson<Catalog>("/api/v1/catalog");
  }

  similarity(
    kg: string,
    model: string,
    a: string,
    b: string,
    version = "latest",
  ): Promise<SimilarityResponse> {
    const query = new URLSearchParams({ a, b, version });
    return this.getJson<SimilarityResponse>(
      `/api/v1/similarity/${encodeURIComponent(kg)}/${encodeURIComponent(model)}?${query}`,
    );
  }

  closest(
    kg: string,
    model: string,
    q: string,
    k = 10,
    version = "latest",
  ): Promise<ClosestResponse> {
    const query = new URLSearchParams({ q, k: String(k), version });
    return this.getJson<ClosestResponse>(
      `/api/v1/closest/${encodeURIComponent(kg)}/${encodeURIComponent(model)}?${query}`,
    );
  }

  downloadUrl(kg: string, model: string, version: string): string {
    return (
      this.base +
      `/api/v1/download/${encodeURIComponent(kg)}/${encodeURIComponent(model)}/` +
      encodeURIComponent(version)
    );
  }
}
