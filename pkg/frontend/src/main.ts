import { DROPDOWN_DIMENSIONS, DropdownDimension, fetchValues, postQuery } from "./api.js";
import { downloadCsv } from "./csv.js";
import { ValidationError, buildPayload } from "./form.js";
import { FormState, QueryType, RawTable } from "./types.js";

const PAGE_SIZE = 25;

const SELECTOR_LABELS: Record<DropdownDimension, string> = {
  algorithm: "Algorithms",
  functionId: "Problems (function id)",
  dimension: "Dimensions",
  instance: "Instances",
};

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className = "",
  text = "",
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text) node.textContent = text;
  return node;
}

export class App {
  readonly root: HTMLElement;
  private readonly baseUrl: string;

  private banner!: HTMLDivElement;
  private errorList!: HTMLDivElement;
  private typeSelect!: HTMLSelectElement;
  private selects = {} as Record<DropdownDimension, HTMLSelectElement>;
  private budgetLo!: HTMLInputElement;
  private budgetHi!: HTMLInputElement;
  private target!: HTMLInputElement;
  private study!: HTMLInputElement;
  private groups = {} as Record<string, HTMLElement>;
  private submitButton!: HTMLButtonElement;
  private exportButton!: HTMLButtonElement;
  private tableHost!: HTMLDivElement;
  private pager!: HTMLDivElement;

  table: RawTable | null = null;
  sortColumn: number | null = null;
  sortDirection: 1 | -1 = 1;
  pageIndex = 0;
  pending = false;
  optionsLoaded = false;

  constructor(root: HTMLElement, baseUrl = "") {
    this.root = root;
    this.baseUrl = baseUrl;
    this.buildSkeleton();
    this.setQueryType("fixed-budget");
  }

  private buildSkeleton(): void {
    this.banner = el("div", "banner hidden");
    this.root.appendChild(this.banner);

    const form = el("form", "query-form");
    form.addEventListener("submit", (event) => {
      event.preventDefault();
      void this.submit();
    });

    const typeRow = el("label", "field", "Query type ");
    this.typeSelect = el("select");
    this.typeSelect.id = "query-type";
    for (const value of ["fixed-budget", "fixed-target", "provenance"]) {
      const option = el("option", "", value);
      option.value = value;
      this.typeSelect.appendChild(option);
    }
    this.typeSelect.addEventListener("change", () =>
      this.setQueryType(this.typeSelect.value as QueryType),
    );
    typeRow.appendChild(this.typeSelect);
    form.appendChild(typeRow);

    const selectors = el("div", "selectors");
    for (const dimension of DROPDOWN_DIMENSIONS) {
      const label = el("label", "field", SELECTOR_LABELS[dimension] + " ");
      const select = el("select");
      select.multiple = true;
      select.size = 4;
      select.id = `select-${dimension}`;
      this.selects[dimension] = select;
      label.appendChild(select);
      selectors.appendChild(label);
    }
    form.appendChild(selectors);

    const budgetGroup = el("div", "field-group");
    const loLabel = el("label", "field", "Budget (evaluations) ");
    this.budgetLo = el("input");
    this.budgetLo.id = "budget-lo";
    loLabel.appendChild(this.budgetLo);
    const hiLabel = el("label", "field", "to (optional, inclusive) ");
    this.budgetHi = el("input");
    this.budgetHi.id = "budget-hi";
    hiLabel.appendChild(this.budgetHi);
    budgetGroup.append(loLabel, hiLabel);
    this.groups["fixed-budget"] = budgetGroup;
    form.appendChild(budgetGroup);

    const targetGroup = el("div", "field-group");
    const targetLabel = el("label", "field", "Target (best fitness delta) ");
    this.target = el("input");
    this.target.id = "target";
    targetLabel.appendChild(this.target);
    targetGroup.appendChild(targetLabel);
    this.groups["fixed-target"] = targetGroup;
    form.appendChild(targetGroup);

    const studyGroup = el("div", "field-group");
    const studyLabel = el("label", "field", "Study (DOI or algorithm label) ");
    this.study = el("input");
    this.study.id = "study";
    studyLabel.appendChild(this.study);
    studyGroup.appendChild(studyLabel);
    this.groups["provenance"] = studyGroup;
    form.appendChild(studyGroup);

    this.errorList = el("div", "errors hidden");
    form.appendChild(this.errorList);

    const actions = el("div", "actions");
    this.submitButton = el("button", "", "Run query");
    this.submitButton.id = "submit";
    this.submitButton.type = "submit";
    this.exportButton = el("button", "", "Export CSV");
    this.exportButton.id = "export-csv";
    this.exportButton.type = "button";
    this.exportButton.disabled = true;
    this.exportButton.addEventListener("click", () => {
      if (this.table) downloadCsv(this.table);
    });
    actions.append(this.submitButton, this.exportButton);
    form.appendChild(actions);

    this.root.appendChild(form);
    this.tableHost = el("div", "results");
    this.tableHost.id = "results";
    this.root.appendChild(this.tableHost);
    this.pager = el("div", "pager");
    this.root.appendChild(this.pager);
  }

  setQueryType(queryType: QueryType): void {
    this.typeSelect.value = queryType;
    for (const [name, group] of Object.entries(this.groups)) {
      group.classList.toggle("hidden", name !== queryType);
    }
  }

  readForm(): FormState {
    const selected = (dimension: DropdownDimension) =>
      [...this.selects[dimension].selectedOptions].map((o) => o.value);
    return {
      queryType: this.typeSelect.value as QueryType,
      selectedAlgorithms: selected("algorithm"),
      selectedProblems: selected("functionId").map(Number),
      selectedInstances: selected("instance").map(Number),
      selectedDimensions: selected("dimension").map(Number),
      budgetLo: this.budgetLo.value,
      budgetHi: this.budgetHi.value,
      target: this.target.value,
      study: this.study.value,
    };
  }

  private showBanner(message: string): void {
    this.banner.textContent = "";
    this.banner.classList.remove("hidden");
    this.banner.appendChild(el("span", "", message + " "));
    const retry = el("button", "", "Retry");
    retry.id = "retry";
    retry.type = "button";
    retry.addEventListener("click", () => void this.refreshOptions());
    this.banner.appendChild(retry);
  }

  private clearBanner(): void {
    this.banner.classList.add("hidden");
    this.banner.textContent = "";
  }

  private updateSubmitState(): void {
    const anyOptions = DROPDOWN_DIMENSIONS.some(
      (dimension) => this.selects[dimension].options.length > 0,
    );
    this.submitButton.disabled = this.pending || !this.optionsLoaded || !anyOptions;
  }

  /** One /values call per dimension; options appear in delivered order. */
  async refreshOptions(): Promise<void> {
    try {
      const lists = await Promise.all(
        DROPDOWN_DIMENSIONS.map((dimension) => fetchValues(this.baseUrl, dimension)),
      );
      DROPDOWN_DIMENSIONS.forEach((dimension, i) => {
        const select = this.selects[dimension];
        const keep = new Set(
          [...select.selectedOptions].map((o) => o.value),
        );
        select.textContent = "";
        for (const value of lists[i]) {
          const option = el("option", "", String(value));
          option.value = String(value);
          option.selected = keep.has(option.value);
          select.appendChild(option);
        }
      });
      this.optionsLoaded = true;
      this.clearBanner();
    } catch (err) {
      this.optionsLoaded = false;
      this.showBanner(`Cannot reach the query service: ${(err as Error).message}.`);
    }
    this.updateSubmitState();
  }

  private showValidation(fields: string[]): void {
    this.errorList.classList.remove("hidden");
    this.errorList.textContent = `Missing or invalid: ${fields.join(", ")}`;
  }

  async submit(): Promise<void> {
    if (this.pending) {
      return;
    }
    this.errorList.classList.add("hidden");
    let payload;
    try {
      payload = buildPayload(this.readForm());
    } catch (err) {
      if (err instanceof ValidationError) {
        this.showValidation(err.fields);
        return;
      }
      throw err;
    }
    this.pending = true;
    this.updateSubmitState();
    try {
      this.table = await postQuery(this.baseUrl, payload);
      this.sortColumn = null;
      this.sortDirection = 1;
      this.pageIndex = 0;
      this.renderTable();
      this.clearBanner();
    } catch (err) {
      this.showBanner(`Query failed: ${(err as Error).message}.`);
      await this.refreshOptions(); // options may be stale after an error
    } finally {
      this.pending = false;
      this.updateSubmitState();
    }
  }

  /** Rows of the current view: sorted copy when a sort column is active. */
  viewRows(): (string | null)[][] {
    if (!this.table) {
      return [];
    }
    if (this.sortColumn === null) {
      return this.table.rows;
    }
    const column = this.sortColumn;
    const direction = this.sortDirection;
    return [...this.table.rows].sort((a, b) => {
      const x = a[column];
      const y = b[column];
      if (x === null || y === null) {
        return x === y ? 0 : x === null ? 1 : -1; // absent cells sink
      }
      const nx = Number(x);
      const ny = Number(y);
      const numeric =
        x.trim() !== "" && y.trim() !== "" && Number.isFinite(nx) && Number.isFinite(ny);
      const order = numeric ? (nx < ny ? -1 : nx > ny ? 1 : 0) : x < y ? -1 : x > y ? 1 : 0;
      return order * direction;
    });
  }

  sortBy(column: number): void {
    if (this.sortColumn === column) {
      this.sortDirection = this.sortDirection === 1 ? -1 : 1;
    } else {
      this.sortColumn = column;
      this.sortDirection = 1;
    }
    this.renderTable();
  }

  setPage(pageIndex: number): void {
    this.pageIndex = pageIndex;
    this.renderTable();
  }

  renderTable(): void {
    this.tableHost.textContent = "";
    this.pager.textContent = "";
    this.exportButton.disabled = this.table === null;
    if (!this.table) {
      return;
    }
    const rows = this.viewRows();
    const pages = Math.max(1, Math.ceil(rows.length / PAGE_SIZE));
    this.pageIndex = Math.min(this.pageIndex, pages - 1);

    const table = el("table");
    const head = el("tr");
    this.table.columns.forEach((name, i) => {
      const th = el("th");
      const marker = this.sortColumn === i ? (this.sortDirection === 1 ? " ↑" : " ↓") : "";
      th.textContent = name + marker;
      th.addEventListener("click", () => this.sortBy(i));
      head.appendChild(th);
    });
    table.appendChild(head);
    for (const row of rows.slice(this.pageIndex * PAGE_SIZE, (this.pageIndex + 1) * PAGE_SIZE)) {
      const tr = el("tr");
      tr.className = "data-row";
      for (const value of row) {
        tr.appendChild(el("td", value === null ? "absent" : "", value ?? ""));
      }
      table.appendChild(tr);
    }
    this.tableHost.appendChild(table);

    this.pager.appendChild(
      el("span", "", `${rows.length} rows, page ${this.pageIndex + 1}/${pages} `),
    );
    const prev = el("button", "", "Prev");
    prev.type = "button";
    prev.disabled = this.pageIndex === 0;
    prev.addEventListener("click", () => this.setPage(this.pageIndex - 1));
    const next = el("button", "", "Next");
    next.type = "button";
    next.disabled = this.pageIndex >= pages - 1;
    next.addEventListener("click", () => this.setPage(this.pageIndex + 1));
    this.pager.append(prev, next);
  }
}

export function initApp(root: HTMLElement, baseUrl = ""): App {
  const app = new App(root, baseUrl);
  void app.refreshOptions();
  return app;
}
