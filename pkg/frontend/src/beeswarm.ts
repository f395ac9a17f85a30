/** Collision-free beeswarm layout.
 *
 * One horizontal linear axis; dots are placed in value order, each at the
 * smallest |y| offset that keeps its center at least 1.9 * radius away from
 * every earlier dot (two dots may overlap by at most 10% of the radius).
 * Candidate offsets come from the circle intersections with already-placed
 * neighbors, so the greedy choice is exact rather than grid-stepped.
 */

export interface BeeswarmInput {
  clusterId: number;
  value: number;
}

export interface BeeswarmDot {
  clusterId: number;
  value: number;
  x: number;
  y: number;
  r: number;
}

export interface BeeswarmScale {
  domain: [number, number];
  range: [number, number];
  apply(v: number): number;
}

export function linearScale(domain: [number, number], range: [number, number]): BeeswarmScale {
  const [d0, d1] = domain;
  const [r0, r1] = range;
  const span = d1 - d0;
  return {
    domain,
    range,
    apply(v: number): number {
      if (span === 0) return r0;   // degenerate domain pins to the origin end
      return r0 + ((v - d0) / span) * (r1 - r0);
    },
  };
}

const MIN_SEP_FACTOR = 1.9; // 2r minus the allowed 10% of r

export function beeswarmLayout(
  dots: BeeswarmInput[],
  width: number,
  radius: number,
): { dots: BeeswarmDot[]; scale: BeeswarmScale } {
  const pad = radius + 2;
  const values = dots.map((d) => d.value);
  // the axis always reaches down to 0 so undefined-as-zero dots sit at the
  // origin (cluster metrics are all non-negative)
  const domain: [number, number] =
    values.length === 0 ? [0, 1] : [Math.min(0, ...values), Math.max(...values)];
  const scale = linearScale(domain, [pad, Math.max(width - pad, pad)]);

  const order = dots
    .map((d, i) => ({ d, i }))
    .sort((a, b) => a.d.value - b.d.value || a.d.clusterId - b.d.clusterId);

  const minSep = MIN_SEP_FACTOR * radius;
  const placed: BeeswarmDot[] = [];
  const out: BeeswarmDot[] = new Array(dots.length);

  for (const { d, i } of order) {
    const x = scale.apply(d.value);
    // earlier dots close enough in x to possibly collide
    const neighbors = placed.filter((p) => Math.abs(p.x - x) < minSep);
    const candidates = [0];
    for (const p of neighbors) {
      const dx = p.x - x;
      const dy = Math.sqrt(Math.max(minSep * minSep - dx * dx, 0));
      candidates.push(p.y + dy, p.y - dy);
    }
    candidates.sort((a, b) => Math.abs(a) - Math.abs(b));
    let y = 0;
    for (const c of candidates) {
      const collides = neighbors.some(
        (p) => (p.x - x) ** 2 + (p.y - c) ** 2 < minSep * minSep - 1e-9,
      );
      if (!collides) {
        y = c;
        break;
      }
    }
    const dot: BeeswarmDot = { clusterId: d.clusterId, value: d.value, x, y, r: radius };
    placed.push(dot);
    out[i] = dot;
  }
  return { dots: out, scale };
}
