//! Triangle quadrature rules in barycentric coordinates; weights sum to one
//! and are multiplied by the triangle area by the caller.

/// A point `(l0, l1, l2)` with weight `w`.
pub type QuadPoint = ([f64; 3], f64);

/// Three-point rule, exact for quadratics.
pub fn gauss3() -> [QuadPoint; 3] {
    let a = 2.0 / 3.0;
    let b = 1.0 / 6.0;
    let w = 1.0 / 3.0;
    [([a, b, b], w), ([b, a, b], w), ([b, b, a], w)]
}

/// Seven-point rule, exact for quintics.
pub fn gauss7() -> [QuadPoint; 7] {
    let a1 = 0.059_715_871_789_770;
    let b1 = 0.470_142_064_105_115;
    let w1 = 0.132_394_152_788_506;
    let a2 = 0.797_426_985_353_087;
    let b2 = 0.101_286_507_323_456;
    let w2 = 0.125_939_180_544_827;
    let c = 1.0 / 3.0;
    [
        ([c, c, c], 0.225),
        ([a1, b1, b1], w1),
        ([b1, a1, b1], w1),
        ([b1, b1, a1], w1),
        ([a2, b2, b2], w2),
        ([b2, a2, b2], w2),
        ([b2, b2, a2], w2),
    ]
}

/// Cartesian point of barycentric coordinates `l` on triangle `p`.
pub fn map_point(p: &[[f64; 2]; 3], l: &[f64; 3]) -> [f64; 2] {
    [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ]
}
