/**
 * Pure rendering of consultation state to display strings and HTML.
 *
 * Numbers shown anywhere come verbatim from the API's `*_str` fields; bar
 * geometry is delegated to CSS `calc()` on the same strings, so the client
 * performs no arithmetic on masses at all.
 */

import type { ConsultationState } from "./model.js";

export const EQUATION_LEGEND: Record<string, string> = {
  wFC: "confirming potential elsewhere",
  SIN: "disconfirming potential on a sibling",
  IFN: "disconfirming potential on the node or an ancestor",
  SN: "disconfirming potential on a child",
  NC: "confirming potential still open on the node",
  bootstrap: "cold start: aggregated potential before any evidence",
};

export interface LeaderboardLine {
  hierarchy: string;
  node: string;
  totalStr: string;
  /** delivered numeric twin, used only to merge-sort across hierarchies */
  sortKey: number;
  contributions: { source: string; equation: string; valueStr: string }[];
}

export interface DisplayModel {
  status: string;
  questionTitle: string;
  questionPrompts: { id: string; prompt: string }[];
  maxIncrementStr: string | null;
  bars: {
    hierarchy: string;
    rows: {
      node: string;
      frame: boolean;
      massStr: string;
      beliefStr: string;
      potConfirmStr: string;
      potDisconfirmStr: string;
    }[];
  }[];
  leaderboard: LeaderboardLine[];
  leaderboardStep: number | null;
  timeline: string[];
  error: string | null;
}

const TOP_N = 8;

export function displayModel(state: ConsultationState): DisplayModel {
  const question = state.question;
  const leaderboard: LeaderboardLine[] = [];
  if (state.increments) {
    for (const hierarchy of state.increments.hierarchies) {
      for (const row of hierarchy.rows) {
        leaderboard.push({
          hierarchy: hierarchy.hierarchy,
          node: row.node,
          totalStr: row.total_str,
          sortKey: row.total,
          contributions: row.contributions.map((c) => ({
            source: c.source,
            equation: c.equation,
            valueStr: c.value_str,
          })),
        });
      }
    }
    // rows arrive sorted per hierarchy; merge on the delivered numeric twin
    leaderboard.sort((a, b) => b.sortKey - a.sortKey || a.node.localeCompare(b.node));
    leaderboard.splice(TOP_N);
  }
  return {
    status: state.status,
    questionTitle: question
      ? `${question.hierarchy} / ${question.node}`
      : state.status === "finished"
        ? "consultation finished"
        : "no question",
    questionPrompts: question ? question.items.map((i) => ({ id: i.id, prompt: i.prompt })) : [],
    maxIncrementStr: question ? question.max_increment_str : null,
    bars: (state.belief?.hierarchies ?? []).map((hierarchy) => ({
      hierarchy: hierarchy.hierarchy,
      rows: hierarchy.rows.map((row) => ({
        node: row.node,
        frame: row.frame,
        massStr: row.mass_str,
        beliefStr: row.belief_str,
        potConfirmStr: row.pot_confirm_str,
        potDisconfirmStr: row.pot_disconfirm_str,
      })),
    })),
    leaderboard,
    leaderboardStep: state.increments?.step ?? null,
    timeline: state.switches.map(
      (s) => `step ${s.step}: switched ${s.from} → ${s.to}`,
    ),
    error: state.error,
  };
}

/** Every user-visible string, flattened; the e2e pass-through audit feeds on this. */
export function renderedStrings(state: ConsultationState): string[] {
  const dm = displayModel(state);
  const out: string[] = [dm.status, dm.questionTitle];
  if (dm.maxIncrementStr) out.push(dm.maxIncrementStr);
  for (const item of dm.questionPrompts) out.push(item.id, item.prompt);
  for (const group of dm.bars) {
    out.push(group.hierarchy);
    for (const row of group.rows) {
      out.push(row.node, row.massStr, row.beliefStr, row.potConfirmStr, row.potDisconfirmStr);
    }
  }
  for (const line of dm.leaderboard) {
    out.push(line.hierarchy, line.node, line.totalStr);
    for (const c of line.contributions) out.push(c.source, c.equation, c.valueStr);
  }
  out.push(...dm.timeline);
  if (dm.error) out.push(dm.error);
  return out;
}

function esc(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function renderHtml(state: ConsultationState): string {
  const dm = displayModel(state);
  const parts: string[] = [];

  parts.push(`<section class="status status-${esc(dm.status)}">`);
  parts.push(`<h2>${esc(dm.questionTitle)}</h2>`);
  if (dm.error) parts.push(`<p class="error">${esc(dm.error)}</p>`);
  if (dm.maxIncrementStr) {
    parts.push(
      `<p class="increment">information increment <b>${esc(dm.maxIncrementStr)}</b></p>`,
    );
  }
  for (const item of dm.questionPrompts) {
    parts.push(
      `<div class="item" data-item="${esc(item.id)}">` +
        `<p class="prompt">${esc(item.prompt)}</p>` +
        `<button data-value="present">present</button>` +
        `<button data-value="absent">absent</button>` +
        `<button data-value="unknown">unknown</button></div>`,
    );
    break; // one answer at a time: only the top-ranked item is actionable
  }
  parts.push(`</section>`);

  parts.push(`<section class="belief"><h2>belief by hierarchy</h2>`);
  for (const group of dm.bars) {
    parts.push(`<h3>${esc(group.hierarchy)}</h3><table><tbody>`);
    for (const row of group.rows) {
      const cls = row.frame ? "row frame" : "row";
      parts.push(
        `<tr class="${cls}"><td class="node">${esc(row.node)}</td>` +
          `<td class="bars"><div class="bar mass" style="width: calc(${esc(row.massStr)} * 100%)"></div>` +
          `<div class="bar bel" style="width: calc(${esc(row.beliefStr)} * 100%)"></div></td>` +
          `<td class="num">m ${esc(row.massStr)}</td><td class="num">Bel ${esc(row.beliefStr)}</td>` +
          `<td class="num">pot+ ${esc(row.potConfirmStr)}</td>` +
          `<td class="num">pot− ${esc(row.potDisconfirmStr)}</td></tr>`,
      );
    }
    parts.push(`</tbody></table>`);
  }
  parts.push(`</section>`);

  parts.push(`<section class="explain"><h2>why this question</h2>`);
  parts.push(`<button id="refresh-increments">refresh</button>`);
  if (dm.leaderboardStep !== null) {
    parts.push(`<p class="step">table as of ${dm.leaderboardStep} answer(s)</p>`);
  }
  parts.push(`<ol class="leaderboard">`);
  for (const line of dm.leaderboard) {
    const breakdown = line.contributions
      .map((c) => `${esc(c.equation)}(${esc(c.source)}) ${esc(c.valueStr)}`)
      .join(", ");
    parts.push(
      `<li><b>${esc(line.hierarchy)} / ${esc(line.node)}</b> total ${esc(line.totalStr)}` +
        `<span class="breakdown">${breakdown}</span></li>`,
    );
  }
  parts.push(`</ol>`);
  parts.push(`<dl class="legend">`);
  for (const [tag, meaning] of Object.entries(EQUATION_LEGEND)) {
    parts.push(`<dt>${esc(tag)}</dt><dd>${esc(meaning)}</dd>`);
  }
  parts.push(`</dl></section>`);

  parts.push(`<section class="timeline"><h2>hierarchy switches</h2>`);
  if (dm.timeline.length === 0) {
    parts.push(`<p class="empty">none yet</p>`);
  } else {
    parts.push(`<ul>`);
    for (const entry of dm.timeline) parts.push(`<li>${esc(entry)}</li>`);
    parts.push(`</ul>`);
  }
  parts.push(`</section>`);
  return parts.join("\n");
}
