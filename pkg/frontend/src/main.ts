// DOM assembly: heatmap canvas with hover/click editing, residual and
// iteration charts, steering controls, and the command log.

import { drawPolyline, linearScalePoints, logScalePoints, WORKER_COLORS } from "./charts.js";
import { SteerClient } from "./client.js";
import { ColorScale, tileCellToGrid, tileToRgba } from "./heatmap.js";
import { Command } from "./protocol.js";
import { SessionView } from "./session.js";

function el<T extends HTMLElement>(id: string): T {
    const node = document.getElementById(id);
    if (!node) throw new Error(`missing element #${id}`);
    return node as T;
}

const session = new SessionView();
const scale = new ColorScale();

const params = new URLSearchParams(window.location.search);
const wsUrl = params.get("ws")
    ?? `ws://${window.location.hostname || "127.0.0.1"}:8751`;

let dirty = true;
const client = new SteerClient(wsUrl, session, () => { dirty = true; });

const heatCanvas = el<HTMLCanvasElement>("heatmap");
const residualCanvas = el<HTMLCanvasElement>("residual-chart");
const iterationCanvas = el<HTMLCanvasElement>("iteration-chart");
const tooltip = el<HTMLDivElement>("tooltip");
const banner = el<HTMLDivElement>("banner");
const statusLine = el<HTMLDivElement>("status");
const commandLog = el<HTMLUListElement>("command-log");

function sendAndNote(command: Command): void {
    const { error } = client.send(command);
    if (error) {
        banner.textContent = `refused locally: ${error}`;
        banner.className = "banner warn";
    }
}

// --- steering controls -------------------------------------------------------

el<HTMLButtonElement>("btn-pause").onclick = () => sendAndNote({ op: "PAUSE" });
el<HTMLButtonElement>("btn-resume").onclick = () => sendAndNote({ op: "RESUME" });
el<HTMLButtonElement>("btn-restart").onclick = () =>
    sendAndNote({ op: "RESTART", keep_field: el<HTMLInputElement>("keep-field").checked });
el<HTMLButtonElement>("btn-mode").onclick = () => {
    const current = session.latest?.mode ?? session.hello?.config.mode ?? "sync";
    sendAndNote({ op: "SET_MODE", mode: current === "sync" ? "async" : "sync" });
};
el<HTMLButtonElement>("btn-tolerance").onclick = () => {
    const value = Number(el<HTMLInputElement>("tolerance").value);
    if (!Number.isFinite(value) || value <= 0) {
        banner.textContent = "tolerance must be a positive number";
        banner.className = "banner warn";
        return;
    }
    sendAndNote({ op: "SET_TOLERANCE", value });
};
for (const edge of ["north", "south", "east", "west"] as const) {
    el<HTMLButtonElement>(`btn-${edge}`).onclick = () => {
        const value = Number(el<HTMLInputElement>("boundary-value").value);
        sendAndNote({ op: "SET_BOUNDARY", edge, value });
    };
}

// --- heatmap interaction ------------------------------------------------------

function canvasToTile(ev: MouseEvent): { tx: number; ty: number } | null {
    const snap = session.latest;
    if (!snap) return null;
    const rect = heatCanvas.getBoundingClientRect();
    const tx = Math.floor(((ev.clientX - rect.left) / rect.width) * snap.tile_width);
    const ty = Math.floor(((ev.clientY - rect.top) / rect.height) * snap.tile_height);
    if (tx < 0 || ty < 0 || tx >= snap.tile_width || ty >= snap.tile_height) {
        return null;
    }
    return { tx, ty };
}

heatCanvas.onmousemove = (ev) => {
    const snap = session.latest;
    const cell = canvasToTile(ev);
    if (!snap || !cell) {
        tooltip.style.display = "none";
        return;
    }
    const value = snap.tile[cell.ty * snap.tile_width + cell.tx];
    const grid = tileCellToGrid(cell.tx, cell.ty, snap.factor, snap.width, snap.height);
    tooltip.style.display = "block";
    tooltip.style.left = `${ev.pageX + 12}px`;
    tooltip.style.top = `${ev.pageY + 12}px`;
    tooltip.textContent = `(${grid.x}, ${grid.y}) = ${value}`;
};
heatCanvas.onmouseleave = () => {
    tooltip.style.display = "none";
};

heatCanvas.onclick = (ev) => {
    const snap = session.latest;
    const cell = canvasToTile(ev);
    if (!snap || !cell) return;
    const grid = tileCellToGrid(cell.tx, cell.ty, snap.factor, snap.width, snap.height);
    const raw = window.prompt(
        `pin cell (${grid.x}, ${grid.y}) to a temperature (empty clears):`);
    if (raw === null) return;
    if (raw.trim() === "") {
        sendAndNote({ op: "CLEAR_SOURCE", x: grid.x, y: grid.y });
    } else {
        const value = Number(raw);
        if (!Number.isFinite(value)) {
            banner.textContent = "not a number";
            banner.className = "banner warn";
            return;
        }
        sendAndNote({ op: "SET_SOURCE", x: grid.x, y: grid.y, value });
    }
};

// --- rendering ---------------------------------------------------------------

function renderHeatmap(): void {
    const snap = session.latest;
    if (!snap) return;
    scale.observe(snap.tile);
    const rgba = tileToRgba(snap.tile, snap.tile_width, snap.tile_height, scale);
    heatCanvas.width = snap.tile_width;
    heatCanvas.height = snap.tile_height;
    const ctx = heatCanvas.getContext("2d");
    if (!ctx) return;
    ctx.putImageData(new ImageData(rgba, snap.tile_width, snap.tile_height), 0, 0);
}

function renderCharts(): void {
    const rctx = residualCanvas.getContext("2d");
    if (rctx) {
        rctx.clearRect(0, 0, residualCanvas.width, residualCanvas.height);
        const values = session.residualHistory.map((p) => p.value);
        drawPolyline(rctx,
            logScalePoints(values, residualCanvas.width, residualCanvas.height),
            "#2f7ed8");
    }
    const ictx = iterationCanvas.getContext("2d");
    if (ictx) {
        ictx.clearRect(0, 0, iterationCanvas.width, iterationCanvas.height);
        let color = 0;
        for (const [, points] of [...session.iterationHistory.entries()].sort()) {
            drawPolyline(ictx,
                linearScalePoints(points.map((p) => p.count),
                    iterationCanvas.width, iterationCanvas.height),
                WORKER_COLORS[color++ % WORKER_COLORS.length]);
        }
    }
}

function renderStatus(): void {
    const snap = session.latest;
    const conn = session.connection;
    banner.className = conn === "open" ? "banner ok" : "banner warn";
    banner.textContent = conn === "open"
        ? `connected to ${wsUrl}`
        : `${conn}${session.lastError ? `: ${session.lastError}` : ""} (retrying)`;
    if (snap) {
        const counts = Object.entries(snap.iterations)
            .map(([w, n]) => `w${w}:${n}`).join("  ");
        const residual = snap.residual === null
            ? "n/a" : `${snap.residual.toExponential(3)} (${snap.residual_kind})`;
        statusLine.textContent =
            `segment ${snap.segment}  mode ${snap.mode}  residual ${residual}  ${counts}`;
    }
}

function renderCommandLog(): void {
    commandLog.innerHTML = "";
    for (const entry of session.commandLog.slice(-12).reverse()) {
        const li = document.createElement("li");
        li.className = entry.status;  // pending entries styled distinctly
        const what = JSON.stringify(entry.command);
        li.textContent = `${entry.id} ${what} [${entry.status}` +
            `${entry.reason ? `: ${entry.reason}` : ""}]`;
        commandLog.appendChild(li);
    }
}

function frame(): void {
    // latest-frame slot: render whatever is newest, skip untouched frames
    if (dirty) {
        dirty = false;
        renderHeatmap();
        renderCharts();
        renderStatus();
        renderCommandLog();
    }
    window.requestAnimationFrame(frame);
}

client.connect();
window.requestAnimationFrame(frame);
