export type QueryType = "fixed-budget" | "fixed-target" | "provenance";

export interface FormState {
  queryType: QueryType;
  selectedAlgorithms: string[];
  selectedProblems: number[];
  selectedInstances: number[];
  selectedDimensions: number[];
  budgetLo: string; // raw input field values; empty string = not provided
  budgetHi: string;
  target: string;
  study: string;
}

export function emptyForm(queryType: QueryType = "fixed-budget"): FormState {
  return {
    queryType,
    selectedAlgorithms: [],
    selectedProblems: [],
    selectedInstances: [],
    selectedDimensions: [],
    budgetLo: "",
    budgetHi: "",
    target: "",
    study: "",
  };
}

export type Budget = { point: number } | { lo: number; hi: number };

export interface TemplateParams {
  algorithms?: string[];
  problems?: number[];
  instances?: number[];
  dimensions?: number[];
  budget?: Budget;
  target?: number;
  study?: string;
}

export interface QueryRequest {
  template: QueryType;
  params: TemplateParams;
}

/** Table cells keep the exact lexical form the service sent (null = absent). */
export interface RawTable {
  columns: string[];
  rows: (string | null)[][];
}
