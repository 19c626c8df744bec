// Client-side session state: the latest snapshot, history ring buffers for
// the charts, and the command log with ack/reject status.

import {
    AckFrame,
    Command,
    HelloFrame,
    RejectFrame,
    ServerFrame,
    SnapshotFrame,
} from "./protocol.js";

export type ConnectionState = "connecting" | "open" | "closed" | "error";

export interface CommandLogEntry {
    id: string;
    command: Command;
    status: "pending" | "acked" | "rejected";
    reason?: string;
}

export interface ResidualPoint {
    timestamp: number;
    value: number;
    kind: "verified" | "tentative";
    segment: number;
}

export interface IterationPoint {
    timestamp: number;
    count: number;
}

const HISTORY_CAPACITY = 720;

export class SessionView {
    connection: ConnectionState = "connecting";
    hello: HelloFrame | null = null;
    latest: SnapshotFrame | null = null;
    segment = 0;
    residualHistory: ResidualPoint[] = [];
    iterationHistory = new Map<string, IterationPoint[]>();
    commandLog: CommandLogEntry[] = [];
    lastError: string | null = null;
    private commandSeq = 0;

    apply(frame: ServerFrame): void {
        switch (frame.type) {
            case "HELLO":
                this.hello = frame;
                this.segment = frame.segment;
                break;
            case "SNAPSHOT":
                this.applySnapshot(frame);
                break;
            case "ACK":
                this.resolve(frame as AckFrame, "acked");
                break;
            case "REJECT": {
                const rej = frame as RejectFrame;
                this.resolve(rej, "rejected", rej.reason);
                break;
            }
        }
    }

    private applySnapshot(frame: SnapshotFrame): void {
        // iteration counters are only comparable within one segment, so the
        // charts reset exactly at the segment boundary
        if (frame.segment !== this.segment) {
            this.segment = frame.segment;
            this.iterationHistory.clear();
        }
        this.latest = frame;
        if (frame.residual !== null) {
            this.residualHistory.push({
                timestamp: frame.timestamp,
                value: frame.residual,
                kind: frame.residual_kind,
                segment: frame.segment,
            });
            if (this.residualHistory.length > HISTORY_CAPACITY) {
                this.residualHistory.shift();
            }
        }
        for (const [worker, count] of Object.entries(frame.iterations)) {
            let points = this.iterationHistory.get(worker);
            if (!points) {
                points = [];
                this.iterationHistory.set(worker, points);
            }
            points.push({ timestamp: frame.timestamp, count });
            if (points.length > HISTORY_CAPACITY) points.shift();
        }
    }

    nextCommandId(): string {
        this.commandSeq += 1;
        return `ui-${this.commandSeq}`;
    }

    logCommand(id: string, command: Command): CommandLogEntry {
        const entry: CommandLogEntry = { id, command, status: "pending" };
        this.commandLog.push(entry);
        if (this.commandLog.length > 100) this.commandLog.shift();
        return entry;
    }

    private resolve(
        frame: AckFrame | RejectFrame,
        status: "acked" | "rejected",
        reason?: string,
    ): void {
        const entry = this.commandLog.find((c) => c.id === frame.id);
        if (entry) {
            entry.status = status;
            if (reason !== undefined) entry.reason = reason;
        }
    }

    gridWidth(): number {
        return this.latest?.width ?? this.hello?.config.width ?? 0;
    }

    gridHeight(): number {
        return this.latest?.height ?? this.hello?.config.height ?? 0;
    }
}
