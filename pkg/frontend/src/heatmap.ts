// Heat-field rendering math, kept free of DOM so it is unit-testable:
// color mapping, tile/grid coordinate conversion, and frame diffing.

export class ColorScale {
    // session-wide observed range; only ever widens so colors stay stable
    min = Infinity;
    max = -Infinity;

    observe(values: ArrayLike<number>): void {
        for (let i = 0; i < values.length; i++) {
            const v = values[i];
            if (v < this.min) this.min = v;
            if (v > this.max) this.max = v;
        }
    }

    normalize(v: number): number {
        if (!(this.max > this.min)) return 0.5;
        const t = (v - this.min) / (this.max - this.min);
        return t < 0 ? 0 : t > 1 ? 1 : t;
    }
}

// cold blue -> neutral -> hot red, linear in the normalized value
const COLD = [28, 68, 160];
const MID = [236, 236, 236];
const HOT = [208, 50, 30];

export function colorOf(t: number): [number, number, number] {
    const lerp = (a: number[], b: number[], u: number): [number, number, number] => [
        Math.round(a[0] + (b[0] - a[0]) * u),
        Math.round(a[1] + (b[1] - a[1]) * u),
        Math.round(a[2] + (b[2] - a[2]) * u),
    ];
    return t < 0.5 ? lerp(COLD, MID, t * 2) : lerp(MID, HOT, t * 2 - 1);
}

export function tileToRgba(
    tile: number[],
    width: number,
    height: number,
    scale: ColorScale,
): Uint8ClampedArray<ArrayBuffer> {
    const out = new Uint8ClampedArray(new ArrayBuffer(width * height * 4));
    for (let i = 0; i < width * height; i++) {
        const [r, g, b] = colorOf(scale.normalize(tile[i]));
        out[i * 4] = r;
        out[i * 4 + 1] = g;
        out[i * 4 + 2] = b;
        out[i * 4 + 3] = 255;
    }
    return out;
}

// A tile cell covers a factor x factor block of grid cells (edge blocks may
// be smaller).  Click-to-edit maps the cell to the center of its block.
export function tileCellToGrid(
    tileX: number,
    tileY: number,
    factor: number,
    gridWidth: number,
    gridHeight: number,
): { x: number; y: number } {
    const startX = tileX * factor;
    const startY = tileY * factor;
    const sizeX = Math.min(factor, gridWidth - startX);
    const sizeY = Math.min(factor, gridHeight - startY);
    return {
        x: startX + Math.floor(sizeX / 2),
        y: startY + Math.floor(sizeY / 2),
    };
}

export interface DiffRegion {
    indices: number[];
    x0: number;
    y0: number;
    x1: number;
    y1: number;
}

// Cells whose values changed between two frames of equal shape, with the
// bounding box of the change; null when nothing moved.
export function frameDiff(
    before: number[],
    after: number[],
    width: number,
    epsilon = 1e-12,
): DiffRegion | null {
    const indices: number[] = [];
    let x0 = Infinity, y0 = Infinity, x1 = -Infinity, y1 = -Infinity;
    for (let i = 0; i < before.length; i++) {
        if (Math.abs(before[i] - after[i]) > epsilon) {
            indices.push(i);
            const x = i % width;
            const y = Math.floor(i / width);
            if (x < x0) x0 = x;
            if (x > x1) x1 = x;
            if (y < y0) y0 = y;
            if (y > y1) y1 = y;
        }
    }
    return indices.length === 0 ? null : { indices, x0, y0, x1, y1 };
}
