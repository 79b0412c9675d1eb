import { parseTableText } from "./rawtable.js";
import { QueryRequest, RawTable } from "./types.js";

export const DROPDOWN_DIMENSIONS = ["algorithm", "functionId", "dimension", "instance"] as const;
export type DropdownDimension = (typeof DROPDOWN_DIMENSIONS)[number];

export class ServiceError extends Error {
  constructor(readonly status: number, detail: string) {
    super(detail);
  }
}

async function errorDetail(resp: Response): Promise<string> {
  try {
    const body = await resp.json();
    return typeof body.detail === "string" ? body.detail : resp.statusText;
  } catch {
    return resp.statusText;
  }
}

export async function fetchValues(
  baseUrl: string,
  dimension: DropdownDimension,
): Promise<(string | number)[]> {
  const resp = await fetch(`${baseUrl}/values?dimension=${encodeURIComponent(dimension)}`);
  if (!resp.ok) {
    throw new ServiceError(resp.status, await errorDetail(resp));
  }
  return (await resp.json()) as (string | number)[];
}

export async function postQuery(baseUrl: string, payload: QueryRequest): Promise<RawTable> {
  const resp = await fetch(`${baseUrl}/query`, {
    method: "POST",
    headers: { "content-type": "application/json" },
    body: JSON.stringify(payload),
  });
  if (!resp.ok) {
    throw new ServiceError(resp.status, await errorDetail(resp));
  }
  return parseTableText(await resp.text());
}
