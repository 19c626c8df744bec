import { describe, expect, it } from "vitest";

import { SnapshotFrame } from "../src/protocol";
import { SessionView } from "../src/session";

function snap(segment: number, counts: Record<string, number>,
              residual: number | null = 1e-3): SnapshotFrame {
    return {
        type: "SNAPSHOT",
        segment,
        mode: "async",
        iterations: counts,
        residual,
        residual_kind: "tentative",
        live: true,
        tile: [0, 0, 0, 0],
        tile_width: 2,
        tile_height: 2,
        factor: 1,
        width: 2,
        height: 2,
        timestamp: 1000 + segment,
    };
}

describe("iteration history", () => {
    it("accumulates within a segment", () => {
        const s = new SessionView();
        s.apply(snap(1, { "1": 5, "2": 7 }));
        s.apply(snap(1, { "1": 9, "2": 11 }));
        expect(s.iterationHistory.get("1")!.map((p) => p.count)).toEqual([5, 9]);
        expect(s.iterationHistory.get("2")!.map((p) => p.count)).toEqual([7, 11]);
    });

    it("resets exactly at the segment boundary", () => {
        const s = new SessionView();
        s.apply(snap(1, { "1": 5 }));
        s.apply(snap(1, { "1": 900 }));
        s.apply(snap(2, { "1": 3 }));
        // nothing from segment 1 survives; segment 2 starts fresh
        expect(s.segment).toBe(2);
        expect(s.iterationHistory.get("1")!.map((p) => p.count)).toEqual([3]);
        s.apply(snap(2, { "1": 6 }));
        expect(s.iterationHistory.get("1")!.map((p) => p.count)).toEqual([3, 6]);
    });

    it("keeps the latest snapshot slot current", () => {
        const s = new SessionView();
        s.apply(snap(1, { "1": 5 }));
        const last = snap(1, { "1": 8 });
        s.apply(last);
        expect(s.latest).toBe(last);
    });
});

describe("residual history", () => {
    it("skips null residuals and tags segments", () => {
        const s = new SessionView();
        s.apply(snap(1, { "1": 1 }, null));
        s.apply(snap(1, { "1": 2 }, 0.5));
        s.apply(snap(2, { "1": 1 }, 0.25));
        expect(s.residualHistory.map((p) => p.value)).toEqual([0.5, 0.25]);
        expect(s.residualHistory.map((p) => p.segment)).toEqual([1, 2]);
    });
});

describe("command log", () => {
    it("tracks pending -> acked", () => {
        const s = new SessionView();
        const id = s.nextCommandId();
        s.logCommand(id, { op: "PAUSE" });
        expect(s.commandLog[0].status).toBe("pending");
        s.apply({ type: "ACK", id });
        expect(s.commandLog[0].status).toBe("acked");
    });

    it("records rejection reasons", () => {
        const s = new SessionView();
        const id = s.nextCommandId();
        s.logCommand(id, { op: "SET_TOLERANCE", value: 1 });
        s.apply({ type: "REJECT", id, reason: "invalid_value" });
        expect(s.commandLog[0].status).toBe("rejected");
        expect(s.commandLog[0].reason).toBe("invalid_value");
    });
});
