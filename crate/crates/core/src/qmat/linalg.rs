//! Raw matrix kernels on `CMat`. Labels live one level up.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::space::Split;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Eigenvalues below this are treated as zero in PSD functions.
pub const EIG_FLOOR: f64 = 1e-12;

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn r(re: f64) -> C64 {
    C64::new(re, 0.0)
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// max |m - m†|
pub fn asymmetry(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Hermitian eigendecomposition, eigenvalues ascending.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (vec![], CMat::zeros(0, 0));
    }
    if n == 1 {
        return (vec![m[(0, 0)].re], CMat::identity(1, 1));
    }
    let eig = hermitian_part(m).symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, idx[c])]);
    (vals, vecs)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    if n <= 1 {
        return eigh(m).0;
    }
    let mut v: Vec<f64> = hermitian_part(m).symmetric_eigenvalues().iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// V diag(f(λ)) V†
pub fn from_spectrum(vals: &[f64], vecs: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let n = vecs.nrows();
    let mut scaled = vecs.clone();
    for (j, &l) in vals.iter().enumerate() {
        let s = f(l);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    scaled * vecs.adjoint()
}

pub fn herm_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    from_spectrum(&vals, &vecs, f)
}

/// Power of a PSD matrix on its support. Eigenvalues below the floor map to 0.
pub fn psd_pow(m: &CMat, p: f64) -> CMat {
    herm_fn(m, |l| if l > EIG_FLOOR { l.powf(p) } else { 0.0 })
}

pub fn psd_sqrt(m: &CMat) -> CMat {
    herm_fn(m, |l| if l > EIG_FLOOR { l.sqrt() } else { 0.0 })
}

/// log2 on the support.
pub fn psd_log2(m: &CMat) -> CMat {
    herm_fn(m, |l| if l > EIG_FLOOR { l.log2() } else { 0.0 })
}

pub fn support_projector(m: &CMat) -> CMat {
    herm_fn(m, |l| if l > EIG_FLOOR { 1.0 } else { 0.0 })
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    if m.nrows() == m.ncols() && asymmetry(m) <= 1e-12 * (1.0 + m.norm()) {
        return eigvalsh(m).iter().map(|l| l.abs()).sum();
    }
    m.clone().singular_values().iter().sum()
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

/// Matrix on an `(rest, sel)` row ordering made from rows of `m`.
///
/// Returns `(X ⊗ 1) m` where `X` acts on the selected digits. Output rows
/// are ordered rest-major, X's output digits minor. Columns are untouched.
pub fn left_apply(x: &CMat, m: &CMat, split: &Split) -> CMat {
    let ds = split.sel.len();
    let dr = split.rest.len();
    assert_eq!(x.ncols(), ds, "local operator width does not match subsystem");
    assert_eq!(m.nrows(), ds * dr, "operand rows do not match space");
    let cols = m.ncols();
    let mut data = Vec::with_capacity(ds * dr * cols);
    for c in 0..cols {
        let col = m.column(c);
        for &ro in &split.rest {
            for &so in &split.sel {
                data.push(col[ro + so]);
            }
        }
    }
    let block = CMat::from_vec(ds, dr * cols, data);
    let prod = x * block;
    CMat::from_vec(x.nrows() * dr, cols, prod.data.as_vec().clone())
}

/// Rows and columns of `m` permuted by a full-index map `perm` (new -> old).
pub fn permute(m: &CMat, perm: &[usize]) -> CMat {
    let n = perm.len();
    CMat::from_fn(n, n, |i, j| m[(perm[i], perm[j])])
}

pub fn permute_rows(m: &CMat, perm: &[usize]) -> CMat {
    CMat::from_fn(perm.len(), m.ncols(), |i, j| m[(perm[i], j)])
}

/// Trace out the `rest` digits of a split, keeping `sel` in order.
pub fn partial_trace_split(m: &CMat, split: &Split) -> CMat {
    let dk = split.sel.len();
    let mut out = CMat::zeros(dk, dk);
    for (j, &kj) in split.sel.iter().enumerate() {
        for (i, &ki) in split.sel.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &t in &split.rest {
                acc += m[(ki + t, kj + t)];
            }
            out[(i, j)] = acc;
        }
    }
    out
}

/// Reshape rows of `f` so that the traced digits move into columns.
///
/// If `f` is a factor of `F F†`, the result `G` satisfies
/// `G G† = Tr_rest(F F†)` on the selected digits.
pub fn reduce_factor(f: &CMat, split: &Split) -> CMat {
    let dk = split.sel.len();
    let dt = split.rest.len();
    let r = f.ncols();
    CMat::from_fn(dk, dt * r, |k, tj| {
        let (t, j) = (tj % dt, tj / dt);
        f[(split.sel[k] + split.rest[t], j)]
    })
}

/// ‖Σ_i s_i k_i k_i†‖₁ for the columns `k_i` of `k` and real weights `s_i`.
///
/// Works in the column space: the nonzero spectrum of `K S K†` equals that
/// of `G^{1/2} S G^{1/2}` with `G = K†K`.
pub fn trace_norm_weighted_gram(k: &CMat, weights: &[f64]) -> f64 {
    assert_eq!(k.ncols(), weights.len());
    let (n, r) = (k.nrows(), k.ncols());
    if r == 0 {
        return 0.0;
    }
    if r >= n {
        let mut scaled = k.clone();
        for (j, &w) in weights.iter().enumerate() {
            scaled.column_mut(j).scale_mut(w);
        }
        let d = scaled * k.adjoint();
        return eigvalsh(&d).iter().map(|l| l.abs()).sum();
    }
    let g = gram(k);
    let (vals, vecs) = eigh(&g);
    let half = from_spectrum(&vals, &vecs, |l| l.max(0.0).sqrt());
    let mut mid = half.clone();
    for (j, &w) in weights.iter().enumerate() {
        mid.row_mut(j).scale_mut(w);
    }
    let h = &half * mid;
    eigvalsh(&h).iter().map(|l| l.abs()).sum()
}

/// ‖A A† − B B†‖₁
pub fn trace_norm_gram_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.nrows(), b.nrows());
    let mut k = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
    k.columns_mut(0, a.ncols()).copy_from(a);
    k.columns_mut(a.ncols(), b.ncols()).copy_from(b);
    let w: Vec<f64> = std::iter::repeat_n(1.0, a.ncols()).chain(std::iter::repeat_n(-1.0, b.ncols())).collect();
    trace_norm_weighted_gram(&k, &w)
}

/// K†K, columns computed in parallel for tall inputs.
pub fn gram(k: &CMat) -> CMat {
    use rayon::prelude::*;
    let r = k.ncols();
    if k.nrows() * r * r < 1 << 22 {
        return k.ad_mul(k);
    }
    let cols: Vec<Vec<C64>> = (0..r)
        .into_par_iter()
        .map(|j| {
            let kj = k.column(j);
            (0..r).map(|i| k.column(i).dotc(&kj)).collect()
        })
        .collect();
    CMat::from_fn(r, r, |i, j| cols[j][i])
}
