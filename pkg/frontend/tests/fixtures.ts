/**
 * Canned API payloads, captured verbatim from the live server against the
 * bundled hotel fixture. Tests assert the UI reproduces these strings
 * byte-for-byte, so do not reformat them.
 */

import type { SchemaResponse, TurnResponse } from "../src/api.js";

export const TURN_COUNT_AVAILABLE: TurnResponse = {
  sql: "SELECT COUNT(id) FROM rooms WHERE status = 'available'",
  target: "database",
  answer: "THERE ARE 3 ROOMS AVAILABLE",
  columns: ["COUNT(id)"],
  rows: [[3]],
  elapsed_ms: 0.7982440001796931,
};

export const TURN_FOLLOW_UP: TurnResponse = {
  sql: "SELECT * FROM rooms WHERE floor = 2",
  target: "previous_result",
  answer: "id=8, floor=2, price=90.0, status=available, category=single",
  columns: ["id", "floor", "price", "status", "category"],
  rows: [[8, 2, 90.0, "available", "single"]],
  elapsed_ms: 1.59534700014774,
};

export const TURN_ERROR_BODY = {
  error: {
    stage: "match_template",
    message: "no template matches; tag kinds present: OTHER",
  },
  elapsed_ms: 0.8995409998533432,
};

export const HOTEL_SCHEMA: SchemaResponse = {
  database: "hotel",
  tables: [
    {
      name: "rooms",
      columns: [
        { name: "id", type: "int" },
        { name: "floor", type: "int" },
        { name: "price", type: "real" },
        { name: "status", type: "text" },
        { name: "category", type: "text" },
      ],
    },
    {
      name: "bookings",
      columns: [
        { name: "id", type: "int" },
        { name: "room_id", type: "int" },
        { name: "guest", type: "text" },
        { name: "month", type: "text" },
        { name: "nights", type: "int" },
      ],
    },
  ],
};

export interface RecordedRequest {
  url: string;
  method: string;
  body: unknown;
}

export type Responder = (url: string, body: unknown) => { status: number; body: unknown };

/** Minimal fetch stand-in: routes to a responder and records every request. */
export function stubFetch(responder: Responder): {
  fetchFn: (url: string, init?: { method?: string; body?: string }) => Promise<{ status: number; json(): Promise<unknown> }>;
  requests: RecordedRequest[];
} {
  const requests: RecordedRequest[] = [];
  return {
    requests,
    fetchFn: async (url, init) => {
      const body = init?.body !== undefined ? JSON.parse(init.body) : undefined;
      requests.push({ url, method: init?.method ?? "GET", body });
      const response = responder(url, body);
      return { status: response.status, json: async () => response.body };
    },
  };
}
