import { describe, expect, it } from "vitest";

import { answerEntry, errorEntry, userEntry } from "../src/transcript.js";
import { renderEntry, renderSchema } from "../src/view.js";
import { HOTEL_SCHEMA, TURN_COUNT_AVAILABLE, TURN_FOLLOW_UP } from "./fixtures.js";

describe("renderEntry", () => {
  it("renders a user bubble with the question text", () => {
    const node = renderEntry(document, userEntry("How many rooms are available?"));
    expect(node.className).toBe("entry user");
    expect(node.querySelector(".text")?.textContent).toBe("How many rooms are available?");
  });

  it("renders the answer, badge, and SQL byte-for-byte", () => {
    const node = renderEntry(document, answerEntry(TURN_COUNT_AVAILABLE));
    expect(node.querySelector(".text")?.textContent).toBe(TURN_COUNT_AVAILABLE.answer);
    expect(node.querySelector(".badge")?.textContent).toBe("database");
    expect(node.querySelector("details.sql code")?.textContent).toBe(TURN_COUNT_AVAILABLE.sql);
  });

  it("collapses the SQL by default", () => {
    const node = renderEntry(document, answerEntry(TURN_COUNT_AVAILABLE));
    const details = node.querySelector<HTMLDetailsElement>("details.sql");
    expect(details?.open).toBe(false);
  });

  it("badges follow-up answers as previous_result", () => {
    const node = renderEntry(document, answerEntry(TURN_FOLLOW_UP));
    expect(node.querySelector(".badge")?.textContent).toBe("previous_result");
    expect(node.querySelector(".badge")?.classList.contains("previous_result")).toBe(true);
  });

  it("renders result rows as a table with NULL for nulls", () => {
    const entry = answerEntry({
      ...TURN_FOLLOW_UP,
      columns: ["id", "status"],
      rows: [
        [3, null],
        [8, "available"],
      ],
    });
    const node = renderEntry(document, entry);
    const headers = Array.from(node.querySelectorAll("th")).map((th) => th.textContent);
    expect(headers).toEqual(["id", "status"]);
    const cells = Array.from(node.querySelectorAll("td")).map((td) => td.textContent);
    expect(cells).toEqual(["3", "NULL", "8", "available"]);
    expect(node.querySelector(".null-cell")).not.toBeNull();
  });

  it("shows latency from the API payload", () => {
    const node = renderEntry(document, answerEntry(TURN_COUNT_AVAILABLE));
    expect(node.querySelector(".elapsed")?.textContent).toBe("0.8 ms");
  });

  it("renders error entries with the failing stage and no SQL", () => {
    const node = renderEntry(
      document,
      errorEntry("flurble womp", "match_template", "no template matches; tag kinds present: OTHER", false),
    );
    expect(node.classList.contains("error")).toBe(true);
    expect(node.querySelector(".stage")?.textContent).toBe("match_template");
    expect(node.querySelector("details.sql")).toBeNull();
    expect(node.querySelector("button.retry")).toBeNull();
  });

  it("adds a retry button only for retryable errors", () => {
    const node = renderEntry(document, errorEntry("q", "network", "fetch failed", true));
    expect(node.querySelector("button.retry")).not.toBeNull();
  });
});

describe("renderSchema", () => {
  it("lists tables with typed columns", () => {
    const panel = document.createElement("div");
    renderSchema(document, panel, HOTEL_SCHEMA);
    expect(panel.querySelector("h2")?.textContent).toBe("hotel");
    const tables = Array.from(panel.querySelectorAll("h3")).map((h) => h.textContent);
    expect(tables).toEqual(["rooms", "bookings"]);
    const roomsItems = Array.from(panel.querySelectorAll(".schema-table")[0]?.querySelectorAll("li") ?? []);
    expect(roomsItems.map((li) => li.textContent)).toEqual([
      "id: int",
      "floor: int",
      "price: real",
      "status: text",
      "category: text",
    ]);
  });

  it("shows an unavailable notice when the schema cannot be fetched", () => {
    const panel = document.createElement("div");
    renderSchema(document, panel, null);
    expect(panel.querySelector(".schema-unavailable")?.textContent).toBe("schema unavailable");
  });
});
