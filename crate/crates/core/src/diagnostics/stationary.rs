use alloc::vec::Vec;
use core::fmt;

use crate::autograd::Tape;
use crate::games::{block_apply, Game, JointState, Linearization, Player, DENSE_JACOBIAN_CAP};
use crate::numerics::{eig_dense, eig_topk, norm2, ArnoldiOptions, DenseMatrix, Spectrum};
use crate::{Error, Result};

/// Tolerance on `|Im λ| / max(1, |λ|max)` for player Hessians.
pub const HESSIAN_IMAG_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumOptions {
    /// Build the dense matrix and compute every eigenvalue.
    pub dense: bool,
    pub arnoldi: ArnoldiOptions,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        SpectrumOptions { dense: false, arnoldi: ArnoldiOptions::default() }
    }
}

fn check_state<G: Game + ?Sized>(g: &G, state: &JointState) -> Result<()> {
    if state.partition() != g.partition() {
        return Err(Error::shape("state does not match the game partition"));
    }
    Ok(())
}

/// Spectrum of a linear map given by `apply`: dense when asked or when
/// `k` covers the whole space, Arnoldi otherwise.
fn operator_spectrum<F>(mut apply: F, n: usize, k: usize, opts: &SpectrumOptions) -> Result<Spectrum>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    if k == 0 {
        return Err(Error::argument("k must be positive"));
    }
    if opts.dense || k >= n {
        if n > DENSE_JACOBIAN_CAP {
            return Err(Error::TooLarge { dim: n, cap: DENSE_JACOBIAN_CAP });
        }
        let mut e = alloc::vec![0.0; n];
        let mut columns = Vec::with_capacity(n);
        for j in 0..n {
            e[j] = 1.0;
            columns.push(apply(&e)?);
            e[j] = 0.0;
        }
        let full = eig_dense(&DenseMatrix::from_columns(&columns)?)?;
        Ok(if opts.dense { full } else { full.top(k.min(n)) })
    } else {
        eig_topk(apply, n, k, &opts.arnoldi)
    }
}

/// Largest-magnitude eigenvalues of the game Jacobian at `state`.
///
/// With `k ≥ n` the full spectrum is computed densely.
pub fn game_jacobian_spectrum<G: Game + ?Sized>(g: &G, state: &JointState, k: usize) -> Result<Spectrum> {
    game_jacobian_spectrum_with(g, state, k, &SpectrumOptions::default())
}

/// [`game_jacobian_spectrum`] with explicit method options. `opts.dense`
/// returns every eigenvalue regardless of `k`.
pub fn game_jacobian_spectrum_with<G: Game + ?Sized>(
    g: &G,
    state: &JointState,
    k: usize,
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    check_state(g, state)?;
    let tape = Tape::new();
    let lin = Linearization::new(&tape, g, state.values())?;
    operator_spectrum(|u| lin.jvp(u), lin.dim(), k, opts)
}

/// Eigenvalues of one player's Hessian of its own loss, the other player
/// held fixed. Fails with [`Error::Asymmetric`] if the result is not real.
pub fn player_hessian_spectrum<G: Game + ?Sized>(
    g: &G,
    state: &JointState,
    player: Player,
    k: usize,
) -> Result<Spectrum> {
    player_hessian_spectrum_with(g, state, player, k, &SpectrumOptions::default())
}

pub fn player_hessian_spectrum_with<G: Game + ?Sized>(
    g: &G,
    state: &JointState,
    player: Player,
    k: usize,
    opts: &SpectrumOptions,
) -> Result<Spectrum> {
    check_state(g, state)?;
    let tape = Tape::new();
    let lin = Linearization::new(&tape, g, state.values())?;
    let (offset, len) = g.partition().range(player);
    let mut spectrum = operator_spectrum(|u| block_apply(&lin, offset, len, u), len, k, opts)?;
    let scale = spectrum.max_magnitude().max(1.0);
    let max_imag = spectrum.max_abs_imag();
    if max_imag > HESSIAN_IMAG_TOL * scale {
        return Err(Error::Asymmetric { max_imag });
    }
    for l in &mut spectrum.eigenvalues {
        l.im = 0.0;
    }
    Ok(spectrum)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Yes,
    No,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Yes => "yes",
            Verdict::No => "no",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Thresholds and spectrum sizes for [`classify`].
#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOptions {
    /// Absolute bound on `‖v‖` for stationarity.
    pub eps_stat: f64,
    /// Eigenvalue margin relative to the largest computed magnitude.
    pub eps_eig: f64,
    pub k: usize,
    pub spectrum: SpectrumOptions,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions { eps_stat: 1e-8, eps_eig: 1e-6, k: 20, spectrum: SpectrumOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StationaryPointReport {
    pub dim: usize,
    pub grad_norm: f64,
    pub eps_stat: f64,
    pub eps_eig: f64,
    pub is_stationary: bool,
    pub lssp: Verdict,
    /// Smallest real part over the computed Jacobian eigenvalues.
    pub lssp_min_re: f64,
    pub dne: Verdict,
    /// Smallest computed Hessian eigenvalue of generator and discriminator.
    pub dne_min: [f64; 2],
    pub jacobian: Spectrum,
    pub hessians: [Spectrum; 2],
}

impl StationaryPointReport {
    /// Whether a spectrum of `len` eigenvalues covers an operator of size `n`.
    fn covers(s: &Spectrum, n: usize) -> bool {
        s.len() == n
    }
}

/// "No" needs a computed value clearly below zero, "yes" needs every value
/// clearly above zero with nothing left uncomputed.
fn verdict(values: &[f64], full: bool, margin: f64, stationary: bool) -> Verdict {
    if values.iter().any(|&x| x < -margin) {
        Verdict::No
    } else if full && stationary && values.iter().all(|&x| x > margin) {
        Verdict::Yes
    } else {
        Verdict::Inconclusive
    }
}

/// Stationarity, local stability and Nash verdicts at `state`.
pub fn classify<G: Game + ?Sized>(g: &G, state: &JointState, opts: &ClassifyOptions) -> Result<StationaryPointReport> {
    if !(opts.eps_stat >= 0.0 && opts.eps_eig >= 0.0) || opts.k == 0 {
        return Err(Error::argument("thresholds must be non-negative and k positive"));
    }
    check_state(g, state)?;
    let part = g.partition();
    let n = part.n();
    let tape = Tape::new();
    let lin = Linearization::new(&tape, g, state.values())?;
    let grad_norm = norm2(lin.field());
    let is_stationary = grad_norm <= opts.eps_stat;

    let jacobian = operator_spectrum(|u| lin.jvp(u), n, opts.k, &opts.spectrum)?;
    let re: Vec<f64> = jacobian.eigenvalues.iter().map(|l| l.re).collect();
    let lssp = verdict(
        &re,
        StationaryPointReport::covers(&jacobian, n),
        opts.eps_eig * jacobian.max_magnitude(),
        is_stationary,
    );
    let lssp_min_re = re.iter().copied().fold(f64::INFINITY, f64::min);

    let hessians = [Player::Generator, Player::Discriminator]
        .map(|p| player_hessian_spectrum_with(g, state, p, opts.k, &opts.spectrum));
    let [hg, hd] = hessians;
    let hessians = [hg?, hd?];
    let mut verdicts = [Verdict::Yes; 2];
    let mut dne_min = [f64::INFINITY; 2];
    for (i, (h, player)) in hessians.iter().zip([Player::Generator, Player::Discriminator]).enumerate() {
        let vals: Vec<f64> = h.eigenvalues.iter().map(|l| l.re).collect();
        dne_min[i] = vals.iter().copied().fold(f64::INFINITY, f64::min);
        let len = part.range(player).1;
        verdicts[i] = verdict(&vals, StationaryPointReport::covers(h, len), opts.eps_eig * h.max_magnitude(), is_stationary);
    }
    let dne = if verdicts.contains(&Verdict::No) {
        Verdict::No
    } else if verdicts.iter().all(|v| *v == Verdict::Yes) {
        Verdict::Yes
    } else {
        Verdict::Inconclusive
    };

    Ok(StationaryPointReport {
        dim: n,
        grad_norm,
        eps_stat: opts.eps_stat,
        eps_eig: opts.eps_eig,
        is_stationary,
        lssp,
        lssp_min_re,
        dne,
        dne_min,
        jacobian,
        hessians,
    })
}

impl fmt::Display for StationaryPointReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let yn = |b: bool| if b { "yes" } else { "no" };
        writeln!(f, "dimension        {}", self.dim)?;
        writeln!(f, "field norm       {:.6e}  (eps_stat {:.3e})", self.grad_norm, self.eps_stat)?;
        writeln!(f, "stationary       {}", yn(self.is_stationary))?;
        writeln!(
            f,
            "LSSP             {}  (min Re over {} {} eigenvalues: {:.6e})",
            self.lssp,
            self.jacobian.len(),
            self.jacobian.method.as_str(),
            self.lssp_min_re
        )?;
        writeln!(
            f,
            "DNE              {}  (min Hessian eigenvalue: generator {:.6e}, discriminator {:.6e})",
            self.dne, self.dne_min[0], self.dne_min[1]
        )?;
        writeln!(f, "eps_eig          {:.3e} (relative)", self.eps_eig)?;
        writeln!(f, "top Jacobian eigenvalues:")?;
        for l in self.jacobian.eigenvalues.iter().take(10) {
            writeln!(f, "  {:+.6e} {:+.6e}i", l.re, l.im)?;
        }
        Ok(())
    }
}
