// Chart scaling math for the residual and iteration plots.  Pure functions
// from history arrays to canvas-space polylines.

export interface Point {
    x: number;
    y: number;
}

// Residuals span many decades near convergence, so the residual chart is
// log-scaled; values at or below zero clamp to the bottom edge.
export function logScalePoints(
    values: number[],
    width: number,
    height: number,
    floor = 1e-16,
): Point[] {
    if (values.length === 0) return [];
    const logs = values.map((v) => Math.log10(Math.max(v, floor)));
    let lo = Math.min(...logs);
    let hi = Math.max(...logs);
    if (hi - lo < 1) {
        const mid = (hi + lo) / 2;
        lo = mid - 0.5;
        hi = mid + 0.5;
    }
    const dx = values.length > 1 ? width / (values.length - 1) : 0;
    return logs.map((lv, i) => ({
        x: i * dx,
        y: height - ((lv - lo) / (hi - lo)) * height,
    }));
}

export function linearScalePoints(
    values: number[],
    width: number,
    height: number,
): Point[] {
    if (values.length === 0) return [];
    const lo = 0;
    const hi = Math.max(...values, 1);
    const dx = values.length > 1 ? width / (values.length - 1) : 0;
    return values.map((v, i) => ({
        x: i * dx,
        y: height - ((v - lo) / (hi - lo)) * height,
    }));
}

export function drawPolyline(
    ctx: CanvasRenderingContext2D,
    points: Point[],
    color: string,
): void {
    if (points.length === 0) return;
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    ctx.moveTo(points[0].x, points[0].y);
    for (let i = 1; i < points.length; i++) {
        ctx.lineTo(points[i].x, points[i].y);
    }
    ctx.stroke();
}

export const WORKER_COLORS = [
    "#e6553a", "#2f7ed8", "#3aa655", "#b24fd9",
    "#e0a030", "#20b2aa", "#d05880", "#708090",
];
