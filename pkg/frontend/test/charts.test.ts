import { describe, expect, it } from "vitest";

import { linearScalePoints, logScalePoints } from "../src/charts";

describe("log residual scaling", () => {
    it("spreads decades across the canvas height", () => {
        const pts = logScalePoints([1, 0.1, 0.01, 0.001], 300, 100);
        expect(pts).toHaveLength(4);
        expect(pts[0].y).toBeCloseTo(0);      // largest at the top
        expect(pts[3].y).toBeCloseTo(100);    // smallest at the bottom
        // monotone values give monotone y
        for (let i = 1; i < pts.length; i++) {
            expect(pts[i].y).toBeGreaterThan(pts[i - 1].y);
        }
    });

    it("clamps zeros to the floor instead of exploding", () => {
        const pts = logScalePoints([1, 0], 100, 50);
        expect(Number.isFinite(pts[1].y)).toBe(true);
    });

    it("handles an empty and a single-point history", () => {
        expect(logScalePoints([], 100, 50)).toEqual([]);
        const one = logScalePoints([0.5], 100, 50);
        expect(one).toHaveLength(1);
        expect(Number.isFinite(one[0].y)).toBe(true);
    });
});

describe("linear iteration scaling", () => {
    it("anchors zero at the bottom", () => {
        const pts = linearScalePoints([0, 50, 100], 200, 100);
        expect(pts[0].y).toBeCloseTo(100);
        expect(pts[2].y).toBeCloseTo(0);
        expect(pts[1].y).toBeCloseTo(50);
    });

    it("spaces points evenly across the width", () => {
        const pts = linearScalePoints([1, 2, 3, 4, 5], 400, 100);
        expect(pts.map((p) => p.x)).toEqual([0, 100, 200, 300, 400]);
    });
});
