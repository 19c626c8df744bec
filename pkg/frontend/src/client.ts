// WebSocket wiring: parses frames into the session and owns reconnection.
// Rendering is decoupled through the session's latest-frame slot; a slow
// renderer drops its own stale work, never the connection.

import { Command, commandFrame, FrameParseError, parseFrame, validateCommand } from "./protocol.js";
import { SessionView } from "./session.js";

const RECONNECT_DELAY_MS = 1500;

export class SteerClient {
    private ws: WebSocket | null = null;
    private stopped = false;

    constructor(
        readonly url: string,
        readonly session: SessionView,
        private onChange: () => void = () => {},
    ) {}

    connect(): void {
        this.session.connection = "connecting";
        this.onChange();
        const ws = new WebSocket(this.url);
        this.ws = ws;
        ws.onopen = () => {
            this.session.connection = "open";
            this.session.lastError = null;
            this.onChange();
        };
        ws.onmessage = (ev: MessageEvent) => {
            try {
                this.session.apply(parseFrame(String(ev.data)));
            } catch (e) {
                if (e instanceof FrameParseError) {
                    this.session.lastError = e.message;
                    this.session.connection = "error";
                    ws.close();
                    return;
                }
                throw e;
            }
            this.onChange();
        };
        ws.onclose = () => {
            if (this.session.connection !== "error") {
                this.session.connection = "closed";
            }
            this.onChange();
            if (!this.stopped) {
                setTimeout(() => this.connect(), RECONNECT_DELAY_MS);
            }
        };
        ws.onerror = () => {
            this.session.lastError = "connection error";
        };
    }

    close(): void {
        this.stopped = true;
        this.ws?.close();
    }

    // Validates locally first; refused commands never reach the wire.
    send(command: Command): { id: string | null; error: string | null } {
        if (this.session.connection !== "open" || this.ws === null) {
            return { id: null, error: "not connected" };
        }
        const reason = validateCommand(
            command, this.session.gridWidth(), this.session.gridHeight());
        if (reason !== null) {
            return { id: null, error: reason };
        }
        const id = this.session.nextCommandId();
        this.session.logCommand(id, command);
        this.ws.send(commandFrame(id, command));
        this.onChange();
        return { id, error: null };
    }
}
