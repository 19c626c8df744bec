// Wire protocol: JSON payloads exchanged with the steering server over a
// WebSocket.  Mirrors the server's frame shapes and its command validation
// rules so obviously bad edits are blocked before they leave the browser.

export type Edge = "north" | "south" | "east" | "west";

export interface HelloFrame {
    type: "HELLO";
    segment: number;
    config: {
        width: number;
        height: number;
        mode: string;
        workers: number;
        tolerance: number;
        boundary: Record<Edge, number>;
        [key: string]: unknown;
    };
}

export interface SnapshotFrame {
    type: "SNAPSHOT";
    segment: number;
    mode: string;
    iterations: Record<string, number>;
    residual: number | null;
    residual_kind: "verified" | "tentative";
    live: boolean;
    tile: number[];
    tile_width: number;
    tile_height: number;
    factor: number;
    width: number;
    height: number;
    timestamp: number;
}

export interface AckFrame {
    type: "ACK";
    id: string;
}

export interface RejectFrame {
    type: "REJECT";
    id: string;
    reason: string;
}

export type ServerFrame = HelloFrame | SnapshotFrame | AckFrame | RejectFrame;

export type Command =
    | { op: "SET_BOUNDARY"; edge: Edge; value: number }
    | { op: "SET_SOURCE"; x: number; y: number; value: number }
    | { op: "CLEAR_SOURCE"; x: number; y: number }
    | { op: "SET_MODE"; mode: "sync" | "async" }
    | { op: "PAUSE" }
    | { op: "RESUME" }
    | { op: "RESTART"; keep_field: boolean }
    | { op: "SET_TOLERANCE"; value: number };

export class FrameParseError extends Error {}

const FRAME_TYPES = new Set(["HELLO", "SNAPSHOT", "ACK", "REJECT"]);

export function parseFrame(data: string): ServerFrame {
    let obj: unknown;
    try {
        obj = JSON.parse(data);
    } catch (e) {
        throw new FrameParseError(`frame is not JSON: ${e}`);
    }
    if (typeof obj !== "object" || obj === null) {
        throw new FrameParseError("frame is not an object");
    }
    const type = (obj as { type?: unknown }).type;
    if (typeof type !== "string" || !FRAME_TYPES.has(type)) {
        throw new FrameParseError(`unknown frame type ${String(type)}`);
    }
    if (type === "SNAPSHOT") {
        const snap = obj as SnapshotFrame;
        if (!Array.isArray(snap.tile) ||
            snap.tile.length !== snap.tile_width * snap.tile_height) {
            throw new FrameParseError("snapshot tile does not match its dimensions");
        }
    }
    return obj as ServerFrame;
}

// Same rules the server applies; returns a rejection reason or null.
export function validateCommand(
    command: Command,
    gridWidth: number,
    gridHeight: number,
): string | null {
    switch (command.op) {
        case "SET_BOUNDARY":
            if (!["north", "south", "east", "west"].includes(command.edge)) {
                return "invalid_value";
            }
            if (!Number.isFinite(command.value)) return "invalid_value";
            return null;
        case "SET_SOURCE":
        case "CLEAR_SOURCE": {
            const { x, y } = command;
            if (!Number.isInteger(x) || !Number.isInteger(y)) return "invalid_value";
            if (x < 1 || x > gridWidth - 2 || y < 1 || y > gridHeight - 2) {
                return "out_of_bounds";
            }
            if (command.op === "SET_SOURCE" && !Number.isFinite(command.value)) {
                return "invalid_value";
            }
            return null;
        }
        case "SET_MODE":
            return command.mode === "sync" || command.mode === "async"
                ? null : "invalid_value";
        case "SET_TOLERANCE":
            return Number.isFinite(command.value) && command.value > 0
                ? null : "invalid_value";
        case "RESTART":
            return typeof command.keep_field === "boolean" ? null : "invalid_value";
        case "PAUSE":
        case "RESUME":
            return null;
    }
}

export function commandFrame(id: string, command: Command): string {
    return JSON.stringify({ type: "COMMAND", id, command });
}
