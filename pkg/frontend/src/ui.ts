// HTML rendering. Pure string builders so they are testable without a
// browser; index.ts injects the results and wires events.

import {
    ActionResult,
    BoardView,
    HintView,
    HistoryEntry,
    OrderJson,
    SessionView,
} from "./api.js";
import {
    OrderSelection,
    battleLabel,
    commanderIds,
    describeOrder,
    legalOrdersForCommander,
} from "./model.js";

function esc(text: string): string {
    return text.replace(/&/g, "&amp;").replace(/</g, "&lt;")
        .replace(/>/g, "&gt;").replace(/"/g, "&quot;");
}

export function objectiveLabels(board: BoardView): Map<number, string> {
    const labels = new Map<number, string>();
    for (const lane of board.lanes) {
        for (const chip of lane.objectives) {
            labels.set(chip.id, chip.label || `obj ${chip.id}`);
        }
    }
    return labels;
}

export function renderBoard(board: BoardView, human: 1 | 2): string {
    const rows = board.lanes.map((lane) => {
        const chips = lane.objectives.map((chip) => {
            const classes = ["chip", `owner-${chip.owner}`];
            if (human === 1 ? chip.front_p1 : chip.front_p2) {
                classes.push("front");
            }
            const name = esc(chip.label || `obj ${chip.id}`);
            return `<span class="${classes.join(" ")}" data-objective="${chip.id}"` +
                ` title="loss ${chip.loss}">${name}</span>`;
        }).join("");
        return `<div class="lane" data-axis="${lane.axis}">` +
            `<span class="lane-head">axis ${lane.axis} ` +
            `(cmdr ${lane.commander})</span>${chips}</div>`;
    }).join("");
    return `<div class="board" data-state="${board.state}">${rows}</div>`;
}

export function renderCommanderPanels(board: BoardView, human: 1 | 2,
                                      selection: OrderSelection): string {
    const labels = objectiveLabels(board);
    const panels = commanderIds(board).map((c) => {
        const options = legalOrdersForCommander(board, c, human).map((order) => {
            const picked = selection.selected(c);
            const active = picked !== null && picked.kind === order.kind
                && picked.target === order.target;
            return `<button class="order${active ? " active" : ""}"` +
                ` data-commander="${c}" data-kind="${order.kind}"` +
                ` data-target="${order.target}">` +
                `${esc(describeOrder(order, labels))}</button>`;
        }).join("");
        return `<div class="commander" data-commander="${c}">` +
            `<span class="commander-head">commander ${c}</span>` +
            (options || "<em>no legal orders</em>") + `</div>`;
    }).join("");
    return `<div class="commanders">${panels}</div>`;
}

export function renderTicker(view: SessionView, discount: number): string {
    const value = view.value === null ? "n/a" : view.value.toFixed(4);
    return `<div class="ticker">` +
        `stage ${view.stage} · ` +
        `stage loss ${view.board.stage_loss.toFixed(3)} · ` +
        `running loss ${view.accumulated_discounted_loss.toFixed(4)} · ` +
        `value ${value} · discount ${discount}</div>`;
}

export function renderBattles(result: ActionResult,
                              labels: Map<number, string>): string {
    if (result.battle_results.length === 0) {
        return `<div class="battles"><em>no battles this stage</em></div>`;
    }
    const items = result.battle_results.map((b) => {
        const name = labels.get(b.objective) ?? `obj ${b.objective}`;
        return `<li class="battle ${battleLabel(b)}">` +
            `P${b.attacker} attacks ${esc(name)}: ${battleLabel(b)}</li>`;
    }).join("");
    return `<div class="battles"><ul>${items}</ul></div>`;
}

export function renderOpponentAction(orders: OrderJson[],
                                     labels: Map<number, string>): string {
    const text = orders.length === 0 ? "idle"
        : orders.map((o) => describeOrder(o, labels)).join("; ");
    return `<div class="opponent">opponent: ${esc(text)}</div>`;
}

export function renderHint(hint: HintView,
                           labels: Map<number, string>): string {
    const rows = hint.strategy.map((entry) => {
        const action = entry.orders.length === 0 ? "idle"
            : entry.orders.map((o) => describeOrder(o, labels)).join("; ");
        return `<tr><td>${entry.probability.toFixed(4)}</td>` +
            `<td>${esc(action)}</td></tr>`;
    }).join("");
    return `<table class="hint"><tr><th>prob</th><th>orders</th></tr>` +
        rows + `</table>`;
}

export function renderHistory(history: HistoryEntry[],
                              labels: Map<number, string>): string {
    const items = history.map((h) => {
        const mine = h.human_orders.length === 0 ? "idle"
            : h.human_orders.map((o) => describeOrder(o, labels)).join("; ");
        const theirs = h.opponent_orders.length === 0 ? "idle"
            : h.opponent_orders.map((o) => describeOrder(o, labels)).join("; ");
        return `<li>stage ${h.stage}: ${h.state} → ${h.next_state} ` +
            `(you: ${esc(mine)} | opp: ${esc(theirs)} | ` +
            `loss ${h.stage_loss.toFixed(3)})</li>`;
    }).join("");
    return `<ol class="history">${items}</ol>`;
}

export function renderError(message: string, constraint: string): string {
    return `<div class="error">${esc(message)}` +
        (constraint ? `<br><small>${esc(constraint)}</small>` : "") +
        `</div>`;
}
