// Client-side view model. Everything here reshapes data the service
// returned; no game rule is recomputed locally. Legal-order lists come
// from the per-objective owner/open-LoC flags in the server's board view.

import {
    BattleResult,
    BoardView,
    HistoryEntry,
    Lane,
    OrderJson,
} from "./api.js";

export function legalOrdersForCommander(board: BoardView, commander: number,
                                        human: 1 | 2): OrderJson[] {
    const openKey = human === 1 ? "open_loc_p1" : "open_loc_p2";
    const orders: OrderJson[] = [];
    for (const lane of board.lanes) {
        if (lane.commander !== commander) continue;
        for (const chip of lane.objectives) {
            if (!chip[openKey]) continue;
            const kind = chip.owner === human ? "rfc" : "atk";
            orders.push({ commander, kind, target: chip.id });
        }
    }
    return orders;
}

export function commanderIds(board: BoardView): number[] {
    return [...new Set(board.lanes.map((lane) => lane.commander))].sort(
        (a, b) => a - b);
}

/** One pending order per commander; submitting sends the non-null ones. */
export class OrderSelection {
    private pending = new Map<number, OrderJson>();

    set(order: OrderJson): void {
        this.pending.set(order.commander, order);
    }

    /** Selecting the already-selected order deselects it. */
    toggle(order: OrderJson): void {
        const cur = this.pending.get(order.commander);
        if (cur && cur.kind === order.kind && cur.target === order.target) {
            this.pending.delete(order.commander);
        } else {
            this.pending.set(order.commander, order);
        }
    }

    clear(): void {
        this.pending.clear();
    }

    selected(commander: number): OrderJson | null {
        return this.pending.get(commander) ?? null;
    }

    toOrders(): OrderJson[] {
        return [...this.pending.values()].sort(
            (a, b) => a.commander - b.commander);
    }
}

export type BattleLabel = "flipped" | "reinforced-save" | "retained";

/** Fold the reinforced flag into the outcome for display. */
export function battleLabel(battle: BattleResult): BattleLabel {
    if (battle.outcome === "flipped") return "flipped";
    return battle.reinforced ? "reinforced-save" : "retained";
}

export function describeOrder(order: OrderJson,
                              labels: Map<number, string>): string {
    const verb = order.kind === "atk" ? "attack" : "reinforce";
    const name = labels.get(order.target) ?? `objective ${order.target}`;
    return `cmdr ${order.commander}: ${verb} ${name}`;
}

/** Recompute the running discounted loss from the history drawer; the
 * ticker shows the server's figure and flags any mismatch. */
export function lossFromHistory(history: HistoryEntry[],
                                discount: number): number {
    return history.reduce(
        (acc, h) => acc + Math.pow(discount, h.stage) * h.stage_loss, 0);
}

export function frontObjectives(lane: Lane, human: 1 | 2): number[] {
    const key = human === 1 ? "front_p1" : "front_p2";
    return lane.objectives.filter((chip) => chip[key]).map((chip) => chip.id);
}

/** The outcome stream used by the replay check: everything randomness
 * touched, in arrival order. */
export interface OutcomeRecord {
    nextState: string;
    opponentAction: OrderJson[];
    accumulatedLoss: number;
}

export function recordsEqual(a: OutcomeRecord[], b: OutcomeRecord[]): boolean {
    return JSON.stringify(a) === JSON.stringify(b);
}
