// Console entry point: wires the DOM to the API client. Optimistic UI is
// deliberately off; every render follows a server response.

import { ApiClient, OrderJson, ServiceError, SessionView } from "./api.js";
import { OrderSelection, lossFromHistory } from "./model.js";
import {
    objectiveLabels,
    renderBattles,
    renderBoard,
    renderCommanderPanels,
    renderError,
    renderHint,
    renderHistory,
    renderOpponentAction,
    renderTicker,
} from "./ui.js";

const api = new ApiClient("");
const selection = new OrderSelection();

let view: SessionView | null = null;
let discount = 0.9;

function el(id: string): HTMLElement {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node;
}

function humanPlayer(): 1 | 2 {
    return (el("side") as HTMLSelectElement).value === "2" ? 2 : 1;
}

function renderSession(): void {
    if (!view) return;
    const labels = objectiveLabels(view.board);
    el("board").innerHTML = renderBoard(view.board, view.human_player);
    el("orders").innerHTML = renderCommanderPanels(
        view.board, view.human_player, selection);
    el("ticker").innerHTML = renderTicker(view, discount);
    el("history").innerHTML = renderHistory(view.history, labels);
    const recomputed = lossFromHistory(view.history, discount);
    if (Math.abs(recomputed - view.accumulated_discounted_loss) > 1e-9) {
        el("message").innerHTML = renderError(
            "history does not add up to the reported loss", "");
    }
    const buttons = Array.from(el("orders").querySelectorAll("button.order"));
    for (const button of buttons) {
        button.addEventListener("click", () => {
            const data = (button as HTMLButtonElement).dataset;
            selection.toggle({
                commander: Number(data.commander),
                kind: data.kind as OrderJson["kind"],
                target: Number(data.target),
            });
            el("orders").innerHTML = renderCommanderPanels(
                view!.board, view!.human_player, selection);
            renderSession();
        });
    }
}

async function start(): Promise<void> {
    const summary = await api.scenario();
    discount = summary.discount;
    const seedText = (el("seed") as HTMLInputElement).value;
    const seed = seedText === "" ? undefined : Number(seedText);
    view = await api.startSession(humanPlayer(), seed);
    selection.clear();
    el("message").innerHTML = "";
    el("battles").innerHTML = "";
    renderSession();
}

async function submit(): Promise<void> {
    if (!view) return;
    try {
        const result = await api.submitOrders(view.session, selection.toOrders());
        const labels = objectiveLabels(result.board);
        el("battles").innerHTML =
            renderOpponentAction(result.opponent_action, labels)
            + renderBattles(result, labels);
        el("message").innerHTML = "";
        selection.clear();
        view = await api.session(view.session);
        renderSession();
    } catch (err) {
        if (err instanceof ServiceError) {
            // board stays as-is: the server rejected the move
            el("message").innerHTML =
                renderError(err.body.message, err.body.constraint);
        } else {
            throw err;
        }
    }
}

async function hint(): Promise<void> {
    if (!view) return;
    const response = await api.hint(view.session);
    el("hintTable").innerHTML =
        renderHint(response, objectiveLabels(view.board));
}

async function whatIf(): Promise<void> {
    const state = (el("whatIfState") as HTMLInputElement).value.trim();
    if (!state) return;
    try {
        const value = await api.value(state);
        el("whatIfResult").textContent =
            `V(${value.state}) = ${value.value.toFixed(6)} ` +
            `(stage loss ${value.stage_loss.toFixed(3)})`;
    } catch (err) {
        if (err instanceof ServiceError) {
            el("whatIfResult").textContent = err.body.message;
        } else {
            throw err;
        }
    }
}

export function init(): void {
    el("start").addEventListener("click", () => void start());
    el("submit").addEventListener("click", () => void submit());
    el("hint").addEventListener("click", () => void hint());
    el("whatIf").addEventListener("click", () => void whatIf());
}

if (typeof document !== "undefined" && document.getElementById("start")) {
    init();
}
