use crate::error::{Error, Result};
use crate::numerics::{complex_gaussian, CMat, Mat, RngState};

/// Unitary DFT matrix `F[i, j] = exp(-2πi·ij/n) / √n`.
pub fn dft_matrix(n: usize) -> CMat {
    let s = 1.0 / (n as f64).sqrt();
    let mut f = CMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            // Reduce the phase index first so large products stay exact.
            let phase = -2.0 * std::f64::consts::PI * ((i * j) % n) as f64 / n as f64;
            f.set(i, j, (s * phase.cos(), s * phase.sin()));
        }
    }
    f
}

/// How receiver noise is drawn.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NoiseLevel {
    Noiseless,
    /// Noise variance set per scene so that `‖HS‖²_F / E‖N‖²_F` is this SNR.
    SnrDb(f64),
    /// Unit-variance complex noise; the pilot power alone sets the SNR.
    UnitVariance,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SceneParams {
    /// Transmit (base-station) antennas `M`.
    pub m_tx: usize,
    /// Receive (user) antennas `N`.
    pub n_rx: usize,
    /// Pilot length `T`.
    pub t_pilots: usize,
    /// Number of active transmit-angle bins.
    pub sparsity: usize,
    /// When false the number of active bins is uniform in `1..=sparsity`.
    pub exact_sparsity: bool,
    pub noise: NoiseLevel,
    /// Pilot power `P` in dB: `tr(SᴴS) = P·T`.
    pub power_db: f64,
}

impl SceneParams {
    pub fn validate(&self) -> Result<()> {
        if self.m_tx == 0 || self.n_rx == 0 || self.t_pilots == 0 || self.sparsity == 0 {
            return Err(Error::invalid(
                "scene dimensions and sparsity must be positive",
            ));
        }
        if self.sparsity > self.m_tx || self.t_pilots > self.m_tx {
            return Err(Error::invalid(format!(
                "need sparsity <= M and T <= M; got sparsity {}, T {}, M {}",
                self.sparsity, self.t_pilots, self.m_tx
            )));
        }
        if !self.power_db.is_finite() {
            return Err(Error::invalid("power_db must be finite"));
        }
        if let NoiseLevel::SnrDb(s) = self.noise {
            if !s.is_finite() {
                return Err(Error::invalid(
                    "SNR must be finite; use the noiseless level instead",
                ));
            }
        }
        Ok(())
    }

    pub fn power_linear(&self) -> f64 {
        10f64.powf(self.power_db / 10.0)
    }
}

/// One downlink training scene `Y = H·S + N` with its angular structure.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelScene {
    /// `N x M` channel.
    pub h: CMat,
    /// `N x M` angular channel; only the `support` columns are nonzero.
    pub h_angular: CMat,
    /// `N x N` receive DFT basis.
    pub a_r: CMat,
    /// `M x M` transmit DFT basis.
    pub a_t: CMat,
    /// `M x T` pilots.
    pub s: CMat,
    /// `N x T` noise realization.
    pub noise: CMat,
    /// `N x T` received pilots `H·S + N`.
    pub y: CMat,
    /// Complex noise variance per entry (0 when noiseless).
    pub noise_variance: f64,
    /// Transmit-angle bins shared by every receive antenna.
    pub support: Vec<usize>,
    pub power_db: f64,
}

/// Complex Gaussian pilots rescaled so that `tr(SᴴS) = P·T` exactly.
pub fn generate_pilot(m_tx: usize, t_pilots: usize, power_db: f64, rng: &mut RngState) -> CMat {
    let s = complex_gaussian(rng, m_tx, t_pilots);
    let energy = s.frobenius_norm().powi(2);
    let target = 10f64.powf(power_db / 10.0) * t_pilots as f64;
    s.scale((target / energy).sqrt())
}

/// Real-stacked sensing matrix `[[Re Ā, −Im Ā], [Im Ā, Re Ā]]` with
/// `Ā = SᴴA_T` for the pilot `S` (`M x T`): the matrix every scene sharing
/// this pilot presents to the solvers.
pub fn pilot_sensing_matrix(pilot: &CMat) -> Result<Mat> {
    Ok(pilot
        .conj_transpose()
        .matmul(&dft_matrix(pilot.rows()))?
        .to_real_stacked())
}

/// A scene with fresh random pilots.
pub fn generate_scene(params: &SceneParams, rng: &mut RngState) -> Result<ChannelScene> {
    params.validate()?;
    let s = generate_pilot(params.m_tx, params.t_pilots, params.power_db, rng);
    generate_scene_with_pilot(params, &s, rng)
}

/// A scene with the given pilots (learned solvers are trained for one fixed
/// pilot matrix, so evaluation reuses it).
pub fn generate_scene_with_pilot(
    params: &SceneParams,
    pilot: &CMat,
    rng: &mut RngState,
) -> Result<ChannelScene> {
    params.validate()?;
    let (m, n, t) = (params.m_tx, params.n_rx, params.t_pilots);
    if pilot.shape() != (m, t) {
        return Err(Error::DimensionMismatch {
            op: "generate_scene_with_pilot",
            left: (m, t),
            right: pilot.shape(),
        });
    }
    let a_r = dft_matrix(n);
    let a_t = dft_matrix(m);

    let size = if params.exact_sparsity {
        params.sparsity
    } else {
        1 + rng.below(params.sparsity)
    };
    let support = rng.sample_without_replacement(m, size);
    let gains = complex_gaussian(rng, n, size);
    let mut h_angular = CMat::zeros(n, m);
    for (c, &bin) in support.iter().enumerate() {
        for i in 0..n {
            h_angular.set(i, bin, gains.get(i, c));
        }
    }
    let h = a_r.matmul(&h_angular)?.matmul(&a_t.conj_transpose())?;
    let hs = h.matmul(pilot)?;

    let unit = complex_gaussian(rng, n, t);
    let noise_variance = match params.noise {
        NoiseLevel::Noiseless => 0.0,
        NoiseLevel::UnitVariance => 1.0,
        NoiseLevel::SnrDb(snr) => {
            hs.frobenius_norm().powi(2) / ((n * t) as f64 * 10f64.powf(snr / 10.0))
        }
    };
    let noise = unit.scale(noise_variance.sqrt());
    let y = hs.add(&noise)?;
    Ok(ChannelScene {
        h,
        h_angular,
        a_r,
        a_t,
        s: pilot.clone(),
        noise,
        y,
        noise_variance,
        support,
        power_db: params.power_db,
    })
}

fn unitarity_error(a: &CMat) -> Result<f64> {
    let g = a.conj_transpose().matmul(a)?;
    Ok(g.sub(&CMat::identity(a.rows()))?.frobenius_norm())
}

fn relative(diff: f64, scale: f64) -> f64 {
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

impl ChannelScene {
    pub fn m_tx(&self) -> usize {
        self.h.cols()
    }

    pub fn n_rx(&self) -> usize {
        self.h.rows()
    }

    pub fn t_pilots(&self) -> usize {
        self.s.cols()
    }

    /// Realized `‖HS‖²_F / ‖N‖²_F` in dB (infinite when noiseless).
    pub fn realized_snr_db(&self) -> Result<f64> {
        let signal = self.h.matmul(&self.s)?.frobenius_norm().powi(2);
        let noise = self.noise.frobenius_norm().powi(2);
        Ok(10.0 * (signal / noise).log10())
    }

    /// Checks the structural identities every scene must satisfy: unitary
    /// bases, `H = A_R·Hᵃ·A_Tᴴ`, `tr(SᴴS) = P·T`, one shared angular support,
    /// `Y = H·S + N`, and `Ȳ = Ā·X̄ + N̄` for the compressed-sensing form.
    pub fn check_invariants(&self) -> Result<()> {
        let fail = |what: &str, value: f64| {
            Err(Error::invalid(format!(
                "scene invariant violated: {what} (error {value:e})"
            )))
        };
        for (name, basis) in [("A_R unitary", &self.a_r), ("A_T unitary", &self.a_t)] {
            let e = unitarity_error(basis)?;
            if e > 1e-10 {
                return fail(name, e);
            }
        }
        let rebuilt = self
            .a_r
            .matmul(&self.h_angular)?
            .matmul(&self.a_t.conj_transpose())?;
        let e = relative(
            rebuilt.sub(&self.h)?.frobenius_norm(),
            self.h.frobenius_norm(),
        );
        if e > 1e-10 {
            return fail("H = A_R Ha A_T^H", e);
        }
        let target = 10f64.powf(self.power_db / 10.0) * self.t_pilots() as f64;
        let e = (self.s.frobenius_norm().powi(2) - target).abs() / target;
        if e > 1e-8 {
            return fail("tr(S^H S) = P T", e);
        }
        for j in 0..self.m_tx() {
            if self.support.binary_search(&j).is_ok() {
                continue;
            }
            for i in 0..self.n_rx() {
                if self.h_angular.get(i, j) != (0.0, 0.0) {
                    return fail("shared angular support", j as f64);
                }
            }
        }
        let hs_n = self.h.matmul(&self.s)?.add(&self.noise)?;
        let e = relative(hs_n.sub(&self.y)?.frobenius_norm(), self.y.frobenius_norm());
        if e > 1e-10 {
            return fail("Y = H S + N", e);
        }
        let cs = self.to_cs_form()?;
        let rhs = cs.a_bar.matmul(&cs.x_bar)?.add(&cs.n_bar)?;
        let e = relative(
            rhs.sub(&cs.y_bar)?.frobenius_norm(),
            cs.y_bar.frobenius_norm(),
        );
        if e > 1e-10 {
            return fail("Ybar = Abar Xbar + Nbar", e);
        }
        Ok(())
    }

    /// `Ȳ = YᴴA_R`, `Ā = SᴴA_T`, `X̄ = Hᵃᴴ`, `N̄ = NᴴA_R`.
    pub fn to_cs_form(&self) -> Result<CsForm> {
        Ok(CsForm {
            y_bar: self.y.conj_transpose().matmul(&self.a_r)?,
            a_bar: self.s.conj_transpose().matmul(&self.a_t)?,
            x_bar: self.h_angular.conj_transpose(),
            n_bar: self.noise.conj_transpose().matmul(&self.a_r)?,
        })
    }

    /// `Ĥ = A_R·X̄ᴴ·A_Tᴴ` for an estimate `X̄` of the angular channel.
    pub fn channel_from_angular(&self, x_bar: &CMat) -> Result<CMat> {
        self.a_r
            .matmul(&x_bar.conj_transpose())?
            .matmul(&self.a_t.conj_transpose())
    }
}

/// The compressed-sensing form `Ȳ = Ā·X̄ + N̄` of a scene.
#[derive(Clone, Debug, PartialEq)]
pub struct CsForm {
    /// `T x N`
    pub y_bar: CMat,
    /// `T x M`
    pub a_bar: CMat,
    /// `M x N`, jointly row-sparse.
    pub x_bar: CMat,
    /// `T x N`
    pub n_bar: CMat,
}

impl CsForm {
    /// Real-stacked sensing matrix `[[Re Ā, −Im Ā], [Im Ā, Re Ā]]` (`2T x 2M`).
    pub fn a_real(&self) -> Mat {
        self.a_bar.to_real_stacked()
    }

    /// Real-stacked measurements `[Re Ȳ; Im Ȳ]` (`2T x N`).
    pub fn y_real(&self) -> Mat {
        self.y_bar.stack_columns()
    }

    /// Real-stacked signal `[Re X̄; Im X̄]` (`2M x N`).
    pub fn x_real(&self) -> Mat {
        self.x_bar.stack_columns()
    }
}

/// `‖Ĥ − H‖_F / ‖H‖_F`.
pub fn nmse(h_hat: &CMat, h_true: &CMat) -> Result<f64> {
    let denom = h_true.frobenius_norm();
    if denom == 0.0 {
        return Err(Error::invalid("nmse: true channel is zero"));
    }
    Ok(h_hat.sub(h_true)?.frobenius_norm() / denom)
}
