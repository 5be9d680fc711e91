// Typed client for the campaign session service. All game logic lives
// server-side; this module only moves JSON.

export type OrderKind = "atk" | "rfc";

export interface OrderJson {
    commander: number;
    kind: OrderKind;
    target: number;
}

export interface ObjectiveChip {
    id: number;
    label: string;
    loss: number;
    owner: 1 | 2;
    front_p1: boolean;
    front_p2: boolean;
    open_loc_p1: boolean;
    open_loc_p2: boolean;
}

export interface Lane {
    axis: number;
    commander: number;
    objectives: ObjectiveChip[];
}

export interface BoardView {
    state: string;
    lanes: Lane[];
    stage_loss: number;
}

export interface ScenarioSummary {
    scenario_digest: string;
    discount: number;
    objectives: { id: number; label: string; loss: number }[];
    axes: number[][];
    commanders: number[][];
    initial_state: string;
    achievable_states: number;
    has_solution: boolean;
}

export interface StrategyEntry {
    probability: number;
    orders: OrderJson[];
}

export interface ValueView {
    scenario_digest: string;
    state: string;
    value: number;
    stage_loss: number;
    player1: { actions: OrderJson[][]; strategy: StrategyEntry[] };
    player2: { actions: OrderJson[][]; strategy: StrategyEntry[] };
}

export interface BattleResult {
    objective: number;
    attacker: 1 | 2;
    defender: 1 | 2;
    reinforced: boolean;
    outcome: "flipped" | "retained";
}

export interface HistoryEntry {
    stage: number;
    state: string;
    human_orders: OrderJson[];
    opponent_orders: OrderJson[];
    battles: BattleResult[];
    next_state: string;
    stage_loss: number;
}

export interface SessionView {
    scenario_digest: string;
    session: string;
    human_player: 1 | 2;
    stage: number;
    accumulated_discounted_loss: number;
    board: BoardView;
    value: number | null;
    history: HistoryEntry[];
}

export interface ActionResult {
    scenario_digest: string;
    session: string;
    opponent_action: OrderJson[];
    battle_results: BattleResult[];
    next_state: string;
    board: BoardView;
    stage_loss: number;
    accumulated_discounted_loss: number;
    stage: number;
    value_before: number;
    value_after: number;
}

export interface HintView {
    scenario_digest: string;
    state: string;
    actions: OrderJson[][];
    strategy: StrategyEntry[];
}

export interface ServiceErrorBody {
    code: string;
    message: string;
    constraint: string;
    scenario_digest: string;
}

export class ServiceError extends Error {
    constructor(public status: number, public body: ServiceErrorBody) {
        super(body.message);
    }
}

export class ApiClient {
    constructor(private baseUrl: string) {}

    private async call<T>(path: string, init?: RequestInit): Promise<T> {
        const res = await fetch(this.baseUrl + path, init);
        if (!res.ok) {
            throw new ServiceError(res.status, await res.json());
        }
        return await res.json();
    }

    private post<T>(path: string, body: unknown): Promise<T> {
        return this.call(path, {
            method: "POST",
            headers: { "Content-Type": "application/json" },
            body: JSON.stringify(body),
        });
    }

    scenario(): Promise<ScenarioSummary> {
        return this.call("/state");
    }

    value(state: string): Promise<ValueView> {
        return this.call(`/value/${state}`);
    }

    startSession(humanPlayer: 1 | 2, seed?: number,
                 state?: string): Promise<SessionView> {
        const body: Record<string, unknown> = { human_player: humanPlayer };
        if (seed !== undefined) body.seed = seed;
        if (state !== undefined) body.state = state;
        return this.post("/session", body);
    }

    session(id: string): Promise<SessionView> {
        return this.call(`/session/${id}`);
    }

    submitOrders(id: string, orders: OrderJson[]): Promise<ActionResult> {
        return this.post(`/session/${id}/action`, { orders });
    }

    hint(id: string): Promise<HintView> {
        return this.post(`/session/${id}/hint`, {});
    }
}
