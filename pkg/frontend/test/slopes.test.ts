import { describe, expect, it } from "vitest";

import { SchemaError } from "../src/csv.js";
import { fittedSlope, pairwiseSlopes } from "../src/slopes.js";

describe("slope estimators", () => {
  it("recovers the exponent of a synthetic h^2 series", () => {
    const param = [0.4, 0.2, 0.1, 0.05];
    const err = param.map((h) => 3.7 * h * h);
    expect(fittedSlope({ param, err })).toBeCloseTo(2.0, 8);
    for (const s of pairwiseSlopes({ param, err })) {
      expect(s).toBeCloseTo(2.0, 8);
    }
  });

  it("is reproducible to 1e-10", () => {
    const param = [0.4, 0.2, 0.1];
    const err = [0.11857784118415823, 0.01717360855982852, 0.0022322529517824];
    const a = fittedSlope({ param, err });
    const b = fittedSlope({ param, err });
    expect(Math.abs(a - b)).toBeLessThan(1e-10);
  });

  it("rejects non-decreasing parameters", () => {
    expect(() => pairwiseSlopes({ param: [0.1, 0.2], err: [1, 2] })).toThrow(
      SchemaError
    );
  });

  it("rejects non-positive errors", () => {
    expect(() => fittedSlope({ param: [0.2, 0.1], err: [1, 0] })).toThrow(
      SchemaError
    );
  });

  it("rejects single-row tables", () => {
    expect(() => fittedSlope({ param: [0.2], err: [1] })).toThrow(SchemaError);
  });
});
