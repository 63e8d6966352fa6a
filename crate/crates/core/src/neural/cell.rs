//! Single time steps of the three recurrent cells and their gradients.
//!
//! Weights are stacked by gate: rows `k·h..(k+1)·h` of `W`, `U` and `b`
//! belong to gate `k`. The gate order is `[z, r, n]` for gru and
//! `[i, f, g, o]` for lstm.
//!
//! ```text
//! rnn   h' = tanh(W x + U h + b)
//! gru   z = σ(Wz x + Uz h + bz)    r = σ(Wr x + Ur h + br)
//!       n = tanh(Wn x + Un (r ⊙ h) + bn)
//!       h' = (1 − z) ⊙ n + z ⊙ h
//! lstm  i, f, o = σ(· x + · h + ·)    g = tanh(Wg x + Ug h + bg)
//!       c' = f ⊙ c + i ⊙ g            h' = o ⊙ tanh(c')
//! ```

use super::spec::CellKind;
use super::tensor::{matvec_acc, matvec_t_acc, outer_acc, sigmoid};
use crate::error::{Error, Result};

/// Borrowed weights of one cell.
#[derive(Clone, Copy, Debug)]
pub struct CellWeights<'a> {
    pub kind: CellKind,
    pub hidden: usize,
    pub input: usize,
    /// `G·h × input`
    pub w: &'a [f64],
    /// `G·h × h`
    pub u: &'a [f64],
    /// `G·h`
    pub b: &'a [f64],
}

impl<'a> CellWeights<'a> {
    pub fn new(
        kind: CellKind,
        hidden: usize,
        input: usize,
        w: &'a [f64],
        u: &'a [f64],
        b: &'a [f64],
    ) -> Result<Self> {
        let gh = kind.gates() * hidden;
        for (name, got, want) in [
            ("W", w.len(), gh * input),
            ("U", u.len(), gh * hidden),
            ("b", b.len(), gh),
        ] {
            if got != want {
                return Err(Error::Shape(format!(
                    "{} {name} needs {want} values for hidden {hidden}, input {input}; got {got}",
                    kind.name()
                )));
            }
        }
        Ok(CellWeights {
            kind,
            hidden,
            input,
            w,
            u,
            b,
        })
    }

    /// Values in one `[W | U | b]` block.
    pub fn block_len(kind: CellKind, hidden: usize, input: usize) -> usize {
        kind.gates() * hidden * (input + hidden + 1)
    }

    /// Splits a `[W | U | b]` block of exactly [`Self::block_len`] values.
    pub(crate) fn from_block(
        kind: CellKind,
        hidden: usize,
        input: usize,
        block: &'a [f64],
    ) -> Self {
        let gh = kind.gates() * hidden;
        let (w, rest) = block.split_at(gh * input);
        let (u, b) = rest.split_at(gh * hidden);
        debug_assert_eq!(b.len(), gh);
        CellWeights {
            kind,
            hidden,
            input,
            w,
            u,
            b,
        }
    }
}

/// Hidden state, plus the cell state for lstm (empty otherwise).
#[derive(Clone, Debug, PartialEq)]
pub struct CellState {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
}

impl CellState {
    pub fn zeros(kind: CellKind, hidden: usize) -> Self {
        CellState {
            h: vec![0.0; hidden],
            c: if kind == CellKind::Lstm {
                vec![0.0; hidden]
            } else {
                Vec::new()
            },
        }
    }
}

/// Advances `state` by one input vector.
pub fn cell_step(weights: &CellWeights<'_>, x: &[f64], state: &CellState) -> Result<CellState> {
    let h = weights.hidden;
    let c_len = if weights.kind == CellKind::Lstm { h } else { 0 };
    if x.len() != weights.input {
        return Err(Error::Shape(format!(
            "input has {} values, cell expects {}",
            x.len(),
            weights.input
        )));
    }
    if state.h.len() != h || state.c.len() != c_len {
        return Err(Error::Shape(format!(
            "state has h {} / c {}, cell expects {h} / {c_len}",
            state.h.len(),
            state.c.len()
        )));
    }
    let cache = forward(weights, x, &state.h, &state.c);
    Ok(CellState {
        h: cache.h,
        c: cache.c,
    })
}

/// Activations kept for the backward pass.
#[derive(Clone, Debug)]
pub(crate) struct StepCache {
    /// Post-activation gate values, `G·h`.
    pub gates: Vec<f64>,
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub tanh_c: Vec<f64>,
}

pub(crate) fn forward(
    wt: &CellWeights<'_>,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
) -> StepCache {
    let h = wt.hidden;
    let mut pre = wt.b.to_vec();
    matvec_acc(&mut pre, wt.w, x);
    match wt.kind {
        CellKind::Rnn => {
            matvec_acc(&mut pre, wt.u, h_prev);
            let out: Vec<f64> = pre.iter().map(|a| a.tanh()).collect();
            StepCache {
                gates: out.clone(),
                h: out,
                c: Vec::new(),
                tanh_c: Vec::new(),
            }
        }
        CellKind::Gru => {
            let (u_zr, u_n) = wt.u.split_at(2 * h * h);
            let (pre_zr, pre_n) = pre.split_at_mut(2 * h);
            matvec_acc(pre_zr, u_zr, h_prev);
            for a in pre_zr.iter_mut() {
                *a = sigmoid(*a);
            }
            let rh: Vec<f64> = pre_zr[h..]
                .iter()
                .zip(h_prev)
                .map(|(r, hp)| r * hp)
                .collect();
            matvec_acc(pre_n, u_n, &rh);
            for a in pre_n.iter_mut() {
                *a = a.tanh();
            }
            let gates = pre;
            let out = (0..h)
                .map(|j| {
                    let (z, n) = (gates[j], gates[2 * h + j]);
                    (1.0 - z) * n + z * h_prev[j]
                })
                .collect();
            StepCache {
                gates,
                h: out,
                c: Vec::new(),
                tanh_c: Vec::new(),
            }
        }
        CellKind::Lstm => {
            matvec_acc(&mut pre, wt.u, h_prev);
            for (k, a) in pre.iter_mut().enumerate() {
                *a = if (2 * h..3 * h).contains(&k) {
                    a.tanh()
                } else {
                    sigmoid(*a)
                };
            }
            let gates = pre;
            let c: Vec<f64> = (0..h)
                .map(|j| gates[h + j] * c_prev[j] + gates[j] * gates[2 * h + j])
                .collect();
            let tanh_c: Vec<f64> = c.iter().map(|v| v.tanh()).collect();
            let out = (0..h).map(|j| gates[3 * h + j] * tanh_c[j]).collect();
            StepCache {
                gates,
                h: out,
                c,
                tanh_c,
            }
        }
    }
}

/// Gradient slices of one `[W | U | b]` block.
pub(crate) struct CellGrads<'a> {
    pub w: &'a mut [f64],
    pub u: &'a mut [f64],
    pub b: &'a mut [f64],
}

impl<'a> CellGrads<'a> {
    pub(crate) fn from_block(
        kind: CellKind,
        hidden: usize,
        input: usize,
        block: &'a mut [f64],
    ) -> Self {
        let gh = kind.gates() * hidden;
        let (w, rest) = block.split_at_mut(gh * input);
        let (u, b) = rest.split_at_mut(gh * hidden);
        CellGrads { w, u, b }
    }
}

/// Gradients flowing out of one step.
pub(crate) struct StepGrads {
    pub x: Vec<f64>,
    pub h_prev: Vec<f64>,
    pub c_prev: Vec<f64>,
}

/// Accumulates parameter gradients into `grads` given the loss gradient
/// with respect to the step's outputs `h'` (`dh`) and `c'` (`dc`, lstm only).
#[allow(clippy::too_many_arguments)]
pub(crate) fn backward(
    wt: &CellWeights<'_>,
    grads: &mut CellGrads<'_>,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    cache: &StepCache,
    dh: &[f64],
    dc: &[f64],
) -> StepGrads {
    let h = wt.hidden;
    let g = &cache.gates;
    let mut dx = vec![0.0; wt.input];
    let mut dh_prev = vec![0.0; h];
    let mut dc_prev = Vec::new();
    let da: Vec<f64> = match wt.kind {
        CellKind::Rnn => {
            let da: Vec<f64> = (0..h).map(|j| dh[j] * (1.0 - g[j] * g[j])).collect();
            outer_acc(grads.u, &da, h_prev);
            matvec_t_acc(&mut dh_prev, wt.u, &da);
            da
        }
        CellKind::Gru => {
            let (z, r, n) = (&g[..h], &g[h..2 * h], &g[2 * h..]);
            let mut da = vec![0.0; 3 * h];
            for j in 0..h {
                let dz = dh[j] * (h_prev[j] - n[j]);
                da[j] = dz * z[j] * (1.0 - z[j]);
                da[2 * h + j] = dh[j] * (1.0 - z[j]) * (1.0 - n[j] * n[j]);
                dh_prev[j] = dh[j] * z[j];
            }
            let (u_zr, u_n) = wt.u.split_at(2 * h * h);
            let (gu_zr, gu_n) = grads.u.split_at_mut(2 * h * h);
            let rh: Vec<f64> = r.iter().zip(h_prev).map(|(r, hp)| r * hp).collect();
            outer_acc(gu_n, &da[2 * h..], &rh);
            let mut drh = vec![0.0; h];
            matvec_t_acc(&mut drh, u_n, &da[2 * h..]);
            for j in 0..h {
                let dr = drh[j] * h_prev[j];
                da[h + j] = dr * r[j] * (1.0 - r[j]);
                dh_prev[j] += drh[j] * r[j];
            }
            outer_acc(gu_zr, &da[..2 * h], h_prev);
            matvec_t_acc(&mut dh_prev, u_zr, &da[..2 * h]);
            da
        }
        CellKind::Lstm => {
            let (i, f, gg, o) = (&g[..h], &g[h..2 * h], &g[2 * h..3 * h], &g[3 * h..]);
            let mut da = vec![0.0; 4 * h];
            dc_prev = vec![0.0; h];
            for j in 0..h {
                let tc = cache.tanh_c[j];
                let dct = dc[j] + dh[j] * o[j] * (1.0 - tc * tc);
                da[j] = dct * gg[j] * i[j] * (1.0 - i[j]);
                da[h + j] = dct * c_prev[j] * f[j] * (1.0 - f[j]);
                da[2 * h + j] = dct * i[j] * (1.0 - gg[j] * gg[j]);
                da[3 * h + j] = dh[j] * tc * o[j] * (1.0 - o[j]);
                dc_prev[j] = dct * f[j];
            }
            outer_acc(grads.u, &da, h_prev);
            matvec_t_acc(&mut dh_prev, wt.u, &da);
            da
        }
    };
    for (gb, d) in grads.b.iter_mut().zip(&da) {
        *gb += d;
    }
    outer_acc(grads.w, &da, x);
    matvec_t_acc(&mut dx, wt.w, &da);
    StepGrads {
        x: dx,
        h_prev: dh_prev,
        c_prev: dc_prev,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
        (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
    }

    // Independent per-gate formulation with separate matrices.
    fn affine(
        w: &[f64],
        u: &[f64],
        b: &[f64],
        x: &[f64],
        h: &[f64],
        gate: usize,
        hidden: usize,
    ) -> Vec<f64> {
        let (ni, nh) = (x.len(), h.len());
        (0..hidden)
            .map(|j| {
                let row = gate * hidden + j;
                let mut s = b[row];
                for k in 0..ni {
                    s += w[row * ni + k] * x[k];
                }
                for k in 0..nh {
                    s += u[row * nh + k] * h[k];
                }
                s
            })
            .collect()
    }

    fn sig(v: f64) -> f64 {
        1.0 / (1.0 + (-v).exp())
    }

    fn oracle(
        kind: CellKind,
        w: &[f64],
        u: &[f64],
        b: &[f64],
        x: &[f64],
        s: &CellState,
    ) -> CellState {
        let hd = s.h.len();
        match kind {
            CellKind::Rnn => CellState {
                h: affine(w, u, b, x, &s.h, 0, hd)
                    .into_iter()
                    .map(f64::tanh)
                    .collect(),
                c: vec![],
            },
            CellKind::Gru => {
                let z: Vec<f64> = affine(w, u, b, x, &s.h, 0, hd)
                    .into_iter()
                    .map(sig)
                    .collect();
                let r: Vec<f64> = affine(w, u, b, x, &s.h, 1, hd)
                    .into_iter()
                    .map(sig)
                    .collect();
                let rh: Vec<f64> = (0..hd).map(|j| r[j] * s.h[j]).collect();
                let n: Vec<f64> = affine(w, u, b, x, &rh, 2, hd)
                    .into_iter()
                    .map(f64::tanh)
                    .collect();
                CellState {
                    h: (0..hd)
                        .map(|j| z[j] * s.h[j] + (1.0 - z[j]) * n[j])
                        .collect(),
                    c: vec![],
                }
            }
            CellKind::Lstm => {
                let gate = |k| affine(w, u, b, x, &s.h, k, hd);
                let i: Vec<f64> = gate(0).into_iter().map(sig).collect();
                let f: Vec<f64> = gate(1).into_iter().map(sig).collect();
                let g: Vec<f64> = gate(2).into_iter().map(f64::tanh).collect();
                let o: Vec<f64> = gate(3).into_iter().map(sig).collect();
                let c: Vec<f64> = (0..hd).map(|j| f[j] * s.c[j] + i[j] * g[j]).collect();
                CellState {
                    h: (0..hd).map(|j| o[j] * c[j].tanh()).collect(),
                    c,
                }
            }
        }
    }

    #[test]
    fn matches_independent_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for kind in CellKind::ALL {
            for _ in 0..20 {
                let (hd, ni) = (rng.gen_range(1..6), rng.gen_range(1..6));
                let gh = kind.gates() * hd;
                let (w, u, b) = (
                    random(&mut rng, gh * ni),
                    random(&mut rng, gh * hd),
                    random(&mut rng, gh),
                );
                let x = random(&mut rng, ni);
                let mut state = CellState::zeros(kind, hd);
                state.h = random(&mut rng, hd);
                if kind == CellKind::Lstm {
                    state.c = random(&mut rng, hd);
                }
                let wt = CellWeights::new(kind, hd, ni, &w, &u, &b).unwrap();
                let got = cell_step(&wt, &x, &state).unwrap();
                let want = oracle(kind, &w, &u, &b, &x, &state);
                for (a, e) in got.h.iter().zip(&want.h).chain(got.c.iter().zip(&want.c)) {
                    assert!((a - e).abs() < 1e-12, "{kind:?}: {a} vs {e}");
                }
            }
        }
    }

    #[test]
    fn zero_rnn_gives_zero() {
        let (w, u, b) = (vec![0.0; 6], vec![0.0; 4], vec![0.0; 2]);
        let wt = CellWeights::new(CellKind::Rnn, 2, 3, &w, &u, &b).unwrap();
        let s = cell_step(&wt, &[5.0, -3.0, 1.0], &CellState::zeros(CellKind::Rnn, 2)).unwrap();
        assert_eq!(s.h, vec![0.0, 0.0]);
    }

    #[test]
    fn saturated_forget_keeps_cell() {
        let h = 2;
        let (w, u) = (vec![0.0; 4 * h * 3], vec![0.0; 4 * h * h]);
        // i → 0, f → 1
        let mut b = vec![0.0; 4 * h];
        b[..h].fill(-1000.0);
        b[h..2 * h].fill(1000.0);
        let wt = CellWeights::new(CellKind::Lstm, h, 3, &w, &u, &b).unwrap();
        let state = CellState {
            h: vec![0.3, -0.2],
            c: vec![0.7, -1.5],
        };
        let next = cell_step(&wt, &[1.0, 2.0, 3.0], &state).unwrap();
        assert_eq!(next.c, state.c);
    }

    #[test]
    fn dimension_mismatch() {
        let (w, u, b) = (vec![0.0; 6], vec![0.0; 4], vec![0.0; 2]);
        assert!(CellWeights::new(CellKind::Gru, 2, 3, &w, &u, &b).is_err());
        let wt = CellWeights::new(CellKind::Rnn, 2, 3, &w, &u, &b).unwrap();
        assert!(cell_step(&wt, &[1.0], &CellState::zeros(CellKind::Rnn, 2)).is_err());
        assert!(cell_step(&wt, &[1.0; 3], &CellState::zeros(CellKind::Rnn, 3)).is_err());
    }

    #[test]
    fn step_gradients_match_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for kind in CellKind::ALL {
            let (hd, ni) = (3, 2);
            let len = CellWeights::block_len(kind, hd, ni);
            let block = random(&mut rng, len);
            let x = random(&mut rng, ni);
            let hp = random(&mut rng, hd);
            let cp = if kind == CellKind::Lstm {
                random(&mut rng, hd)
            } else {
                vec![]
            };
            let dh = random(&mut rng, hd);
            let dc = if kind == CellKind::Lstm {
                random(&mut rng, hd)
            } else {
                vec![]
            };
            let objective = |block: &[f64], x: &[f64], hp: &[f64], cp: &[f64]| {
                let c = forward(&CellWeights::from_block(kind, hd, ni, block), x, hp, cp);
                let mut s: f64 = c.h.iter().zip(&dh).map(|(a, b)| a * b).sum();
                s += c.c.iter().zip(&dc).map(|(a, b)| a * b).sum::<f64>();
                s
            };
            let wt = CellWeights::from_block(kind, hd, ni, &block);
            let cache = forward(&wt, &x, &hp, &cp);
            let mut gblock = vec![0.0; len];
            let out = {
                let mut grads = CellGrads::from_block(kind, hd, ni, &mut gblock);
                backward(&wt, &mut grads, &x, &hp, &cp, &cache, &dh, &dc)
            };
            let eps = 1e-6;
            let numeric = |f: &dyn Fn(f64) -> f64| (f(eps) - f(-eps)) / (2.0 * eps);
            for k in 0..len {
                let n = numeric(&|e| {
                    let mut b = block.clone();
                    b[k] += e;
                    objective(&b, &x, &hp, &cp)
                });
                assert!((n - gblock[k]).abs() < 1e-7, "{kind:?} param {k}");
            }
            for k in 0..ni {
                let n = numeric(&|e| {
                    let mut v = x.clone();
                    v[k] += e;
                    objective(&block, &v, &hp, &cp)
                });
                assert!((n - out.x[k]).abs() < 1e-7);
            }
            for k in 0..hd {
                let n = numeric(&|e| {
                    let mut v = hp.clone();
                    v[k] += e;
                    objective(&block, &x, &v, &cp)
                });
                assert!((n - out.h_prev[k]).abs() < 1e-7);
                if kind == CellKind::Lstm {
                    let n = numeric(&|e| {
                        let mut v = cp.clone();
                        v[k] += e;
                        objective(&block, &x, &hp, &v)
                    });
                    assert!((n - out.c_prev[k]).abs() < 1e-7);
                }
            }
        }
    }
}
