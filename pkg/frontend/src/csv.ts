import { RawTable } from "./types.js";

function field(value: string | null): string {
  if (value === null) {
    return "";
  }
  if (/[",\n\r]/.test(value)) {
    return '"' + value.replace(/"/g, '""') + '"';
  }
  return value;
}

/**
 * Same contract as the CLI's CSV output: header line, comma separation,
 * minimal RFC 4180 quoting, LF line ends, absent cells as empty fields.
 * Rows are written in delivery order so the file matches the CLI for the
 * same query regardless of how the on-screen view is sorted.
 */
export function toCsv(table: RawTable): string {
  const lines = [table.columns.map(field).join(",")];
  for (const row of table.rows) {
    lines.push(row.map(field).join(","));
  }
  return lines.join("\n") + "\n";
}

export function downloadCsv(table: RawTable, filename = "results.csv"): void {
  const blob = new Blob([toCsv(table)], { type: "text/csv;charset=utf-8;" });
  const url = URL.createObjectURL(blob);
  const a = document.createElement("a");
  a.href = url;
  a.download = filename;
  a.style.display = "none";
  document.body.appendChild(a);
  a.click();
  document.body.removeChild(a);
  URL.revokeObjectURL(url);
}
