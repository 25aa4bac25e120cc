use num_complex::Complex64;

/// Index of each mode in the four-component state.
pub const PUMP: usize = 0;
pub const SIGNAL: usize = 1;
pub const IDLER: usize = 2;
pub const THIRD: usize = 3;

pub type Amplitudes = [Complex64; 4];

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Coefficients of the degenerate-pump Kerr system with an optional
/// third-harmonic channel. Envelopes follow `E_m = a_m exp(i k_m z)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledModes {
    /// Per-mode Kerr coefficient, rad/cell/W.
    pub gamma: [f64; 4],
    /// k_s + k_i - 2 k_p, rad/cell.
    pub delta_k: f64,
    /// k_3 - 3 k_p, rad/cell.
    pub delta_k3: f64,
    /// Amplitude attenuation per cell for each mode.
    pub attenuation: [f64; 4],
    /// Drop pump back-action and depletion; only pump self-phase remains.
    pub undepleted: bool,
    pub third_harmonic: bool,
    /// Self- and cross-phase terms.
    pub phase_modulation: bool,
}

impl CoupledModes {
    pub fn lossless(gamma: f64, delta_k: f64) -> Self {
        Self {
            gamma: [gamma; 4],
            delta_k,
            delta_k3: 0.0,
            attenuation: [0.0; 4],
            undepleted: false,
            third_harmonic: false,
            phase_modulation: true,
        }
    }
}

/// Right-hand side of the coupled-mode system at position `z` (cells).
pub fn coupled_mode_rhs(z: f64, a: &Amplitudes, sys: &CoupledModes) -> Amplitudes {
    let [ap, as_, ai, a3] = *a;
    let [gp, gs, gi, g3] = sys.gamma;
    let pw = [ap.norm_sqr(), as_.norm_sqr(), ai.norm_sqr(), a3.norm_sqr()];
    let total: f64 = pw.iter().sum();
    let xpm = |m: usize| -> f64 {
        if !sys.phase_modulation {
            0.0
        } else if sys.undepleted {
            if m == PUMP {
                pw[PUMP]
            } else {
                2.0 * pw[PUMP]
            }
        } else {
            2.0 * total - pw[m]
        }
    };

    let mix = Complex64::from_polar(1.0, sys.delta_k * z);
    let dpump = I * gp * xpm(PUMP) * ap;
    let dpump = if sys.undepleted {
        dpump
    } else {
        dpump + 2.0 * I * gp * as_ * ai * ap.conj() * mix
    };
    let ap2 = ap * ap;
    let ds = I * gs * (xpm(SIGNAL) * as_ + ap2 * ai.conj() * mix.conj());
    let di = I * gi * (xpm(IDLER) * ai + ap2 * as_.conj() * mix.conj());

    let (dpump, d3) = if sys.third_harmonic {
        let mix3 = Complex64::from_polar(1.0, sys.delta_k3 * z);
        let d3 = I * g3 * (xpm(THIRD) * a3 + ap2 * ap * mix3.conj() / 3.0);
        let back = if sys.undepleted {
            Complex64::new(0.0, 0.0)
        } else {
            I * gp * a3 * ap.conj() * ap.conj() * mix3
        };
        (dpump + back, d3)
    } else {
        (dpump, Complex64::new(0.0, 0.0))
    };

    let al = sys.attenuation;
    [
        dpump - al[0] * ap,
        ds - al[1] * as_,
        di - al[2] * ai,
        d3 - al[3] * a3,
    ]
}
