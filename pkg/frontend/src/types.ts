export interface CatalogKg {
  name: string;
  versions: string[];
  latest: string;
  models: string[];
}

export interface Catalog {
  kgs: CatalogKg[];
}

export interface SimilarityResponse {
  kg: string;
  version: string;
  model: string;
  a: string;
  b: string;
  score: number;
}

export interface ClosestRow {
  iri: string;
  label: string;
  score: number;
  url: string;
}

export interface ClosestResponse {
  kg: string;
  version: string;
  model: string;
  query: string;
  k: number;
  rows: ClosestRow[];
}

export interface ErrorBody {
  code: string;
  message: string;
  label?: string;
  candidates?: string[];
}

/** The kg/model/version triple every view operates on. */
export interface Selection {
  kg: string;
  model: string;
  version: string;
}
