import { Budget, FormState, QueryRequest, TemplateParams } from "./types.js";

/** Raised when required inputs for the selected query type are missing or bad. */
export class ValidationError extends Error {
  fields: string[];

  constructor(fields: string[]) {
    super(`missing or invalid fields: ${fields.join(", ")}`);
    this.fields = fields;
  }
}

function parseIntField(raw: string): number | null {
  if (!/^\d+$/.test(raw.trim())) {
    return null;
  }
  return parseInt(raw.trim(), 10);
}

function selectorParams(state: FormState): TemplateParams {
  const params: TemplateParams = {};
  if (state.selectedAlgorithms.length > 0) {
    params.algorithms = [...state.selectedAlgorithms];
  }
  if (state.selectedProblems.length > 0) {
    params.problems = [...state.selectedProblems];
  }
  if (state.selectedInstances.length > 0) {
    params.instances = [...state.selectedInstances];
  }
  if (state.selectedDimensions.length > 0) {
    params.dimensions = [...state.selectedDimensions];
  }
  return params;
}

function buildBudget(state: FormState, bad: string[]): Budget | undefined {
  const lo = parseIntField(state.budgetLo);
  if (lo === null) {
    bad.push("budgetLo");
    return undefined;
  }
  if (state.budgetHi.trim() === "") {
    return { point: lo };
  }
  const hi = parseIntField(state.budgetHi);
  if (hi === null || hi < lo) {
    bad.push("budgetHi");
    return undefined;
  }
  return { lo, hi };
}

/**
 * Map the form state onto the service's query request schema.
 * Empty optional selectors are omitted; a filled budgetHi turns the budget
 * into an inclusive range, otherwise it is a point.
 */
export function buildPayload(state: FormState): QueryRequest {
  const bad: string[] = [];
  if (state.queryType === "fixed-budget") {
    const params = selectorParams(state);
    const budget = buildBudget(state, bad);
    if (bad.length > 0) {
      throw new ValidationError(bad);
    }
    params.budget = budget;
    return { template: "fixed-budget", params };
  }
  if (state.queryType === "fixed-target") {
    const params = selectorParams(state);
    const target = Number(state.target);
    if (state.target.trim() === "" || !Number.isFinite(target)) {
      throw new ValidationError(["target"]);
    }
    params.target = target;
    return { template: "fixed-target", params };
  }
  if (state.study.trim() === "") {
    throw new ValidationError(["study"]);
  }
  return { template: "provenance", params: { study: state.study.trim() } };
}
