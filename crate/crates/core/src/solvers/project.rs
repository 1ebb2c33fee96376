use crate::standard::ConeDims;

/// Euclidean projection of `(t, x)` onto `{‖x‖ <= t}`, in place.
pub fn project_soc(v: &mut [f64]) {
    let t = v[0];
    let norm = v[1..].iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm <= t {
        return;
    }
    if norm <= -t {
        v.iter_mut().for_each(|x| *x = 0.0);
        return;
    }
    let a = 0.5 * (t + norm);
    v[0] = a;
    for x in &mut v[1..] {
        *x *= a / norm;
    }
}

/// Blockwise projection onto `{0}^z × R_+^l × SOC(q_1) × …`.
pub fn project_cone(v: &[f64], cones: &ConeDims) -> Vec<f64> {
    assert_eq!(v.len(), cones.total(), "vector length must match the cone layout");
    let mut out = v.to_vec();
    let mut i = 0;
    for x in &mut out[..cones.zero] {
        *x = 0.0;
    }
    i += cones.zero;
    for x in &mut out[i..i + cones.nonneg] {
        *x = x.max(0.0);
    }
    i += cones.nonneg;
    for &q in &cones.soc {
        project_soc(&mut out[i..i + q]);
        i += q;
    }
    out
}
