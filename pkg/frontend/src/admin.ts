/**
 * Admin view: renders the summary endpoint (per-group accuracy, exact
 * binomial p-values, decoy selections and explanation tallies) after
 * data collection. Reached via the #/admin hash; never linked from the
 * participant flow.
 */

import { SurveyApi } from "./api.js";

interface GroupStats {
  n_trials: number;
  n_correct: number;
  accuracy: number | null;
  p_two_sided: number | null;
  p_one_sided: number | null;
}

function fmt(value: number | null, digits = 4): string {
  return value === null ? "-" : value.toFixed(digits);
}

function statsRow(name: string, stats: GroupStats): HTMLTableRowElement {
  const row = document.createElement("tr");
  const cells = [
    name,
    String(stats.n_trials),
    String(stats.n_correct),
    fmt(stats.accuracy),
    fmt(stats.p_two_sided, 6),
    fmt(stats.p_one_sided, 6),
  ];
  for (const text of cells) {
    const td = document.createElement("td");
    td.textContent = text;
    row.append(td);
  }
  return row;
}

export class AdminApp {
  constructor(
    private readonly root: HTMLElement,
    private readonly api: SurveyApi,
  ) {}

  async render(): Promise<void> {
    const summary = await this.api.summary();
    this.root.replaceChildren();

    const title = document.createElement("h1");
    title.textContent = "Survey summary";
    this.root.append(title);

    const meta = document.createElement("p");
    meta.id = "summary-meta";
    meta.textContent =
      `${summary.n_participants} participants, ` +
      `${summary.n_informative} informative pairs of ${summary.n_pairs}`;
    this.root.append(meta);

    const table = document.createElement("table");
    table.id = "summary-table";
    const head = document.createElement("tr");
    for (const label of ["group", "trials", "correct", "accuracy", "p two-sided", "p one-sided"]) {
      const th = document.createElement("th");
      th.textContent = label;
      head.append(th);
    }
    table.append(head);
    table.append(statsRow("overall", summary.overall as GroupStats));
    const byGroup = summary.by_group as Record<string, GroupStats>;
    for (const [name, stats] of Object.entries(byGroup)) {
      table.append(statsRow(name, stats));
    }
    table.append(statsRow("non-cardiologists", summary.non_cardiologists as GroupStats));
    this.root.append(table);

    const tagsTitle = document.createElement("h2");
    tagsTitle.textContent = "Explanations";
    this.root.append(tagsTitle);
    const tags = document.createElement("pre");
    tags.id = "tag-tallies";
    tags.textContent = JSON.stringify(summary.tag_tallies, null, 2);
    this.root.append(tags);

    const decoyTitle = document.createElement("h2");
    decoyTitle.textContent = "Decoy selections";
    this.root.append(decoyTitle);
    const decoys = document.createElement("pre");
    decoys.id = "decoy-selections";
    decoys.textContent = JSON.stringify(summary.decoy_selections, null, 2);
    this.root.append(decoys);
  }
}
