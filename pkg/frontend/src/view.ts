/**
 * DOM rendering for transcript entries and the schema panel.
 *
 * Everything is built with createElement/textContent (no innerHTML with
 * user or server text), so strings land in the DOM byte-for-byte.
 */

import type { SchemaResponse } from "./api.js";
import type { ResultTable, TranscriptEntry } from "./transcript.js";

function el<K extends keyof HTMLElementTagNameMap>(
  doc: Document,
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = doc.createElement(tag);
  if (className) {
    node.className = className;
  }
  if (text !== undefined) {
    node.textContent = text;
  }
  return node;
}

function renderTable(doc: Document, result: ResultTable): HTMLElement {
  const wrapper = el(doc, "div", "result-table");
  const table = el(doc, "table");
  const head = el(doc, "tr");
  for (const column of result.columns) {
    head.appendChild(el(doc, "th", undefined, column));
  }
  table.appendChild(head);
  for (const row of result.rows) {
    const tr = el(doc, "tr");
    for (const cell of row) {
      tr.appendChild(el(doc, "td", cell === null ? "null-cell" : undefined, cell === null ? "NULL" : String(cell)));
    }
    table.appendChild(tr);
  }
  wrapper.appendChild(table);
  return wrapper;
}

export function renderEntry(doc: Document, entry: TranscriptEntry): HTMLElement {
  const bubble = el(doc, "div", `entry ${entry.role}`);
  if (entry.role === "user") {
    bubble.appendChild(el(doc, "p", "text", entry.text));
    return bubble;
  }

  if (entry.error) {
    bubble.classList.add("error");
    bubble.appendChild(el(doc, "span", "stage", entry.error.stage));
    bubble.appendChild(el(doc, "p", "text", entry.error.message));
    if (entry.error.retryable) {
      const retry = el(doc, "button", "retry", "retry");
      retry.type = "button";
      bubble.appendChild(retry);
    }
    return bubble;
  }

  // answer entry: badge, answer text, collapsed SQL, result rows, latency
  bubble.appendChild(el(doc, "span", `badge ${entry.target}`, entry.target));
  bubble.appendChild(el(doc, "p", "text", entry.text));
  if (entry.sql !== undefined) {
    const details = el(doc, "details", "sql");
    details.appendChild(el(doc, "summary", undefined, "SQL"));
    details.appendChild(el(doc, "code", undefined, entry.sql));
    bubble.appendChild(details); // collapsed by default: answers first, SQL on demand
  }
  if (entry.rows && entry.rows.rows.length > 0) {
    bubble.appendChild(renderTable(doc, entry.rows));
  }
  if (entry.elapsedMs !== undefined) {
    bubble.appendChild(el(doc, "span", "elapsed", `${entry.elapsedMs.toFixed(1)} ms`));
  }
  return bubble;
}

export function renderTranscript(doc: Document, container: HTMLElement, entries: TranscriptEntry[]): void {
  container.replaceChildren();
  for (const entry of entries) {
    container.appendChild(renderEntry(doc, entry));
  }
}

export function renderSchema(doc: Document, panel: HTMLElement, schema: SchemaResponse | null): void {
  panel.replaceChildren();
  if (schema === null) {
    panel.appendChild(el(doc, "p", "schema-unavailable", "schema unavailable"));
    return;
  }
  panel.appendChild(el(doc, "h2", undefined, schema.database));
  for (const table of schema.tables) {
    const section = el(doc, "section", "schema-table");
    section.appendChild(el(doc, "h3", undefined, table.name));
    const list = el(doc, "ul");
    for (const column of table.columns) {
      list.appendChild(el(doc, "li", undefined, `${column.name}: ${column.type}`));
    }
    section.appendChild(list);
    panel.appendChild(section);
  }
}
