//! Weyl operators `W(a, b) = Z^a X^b` and Bell-basis vectors as explicit
//! complex matrices.

use num_complex::Complex64;

use super::WeylLabel;

pub type Mat2 = [[Complex64; 2]; 2];
pub type Mat4 = [[Complex64; 4]; 4];
pub type Vec4 = [Complex64; 4];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `W(a, b) = Z^a X^b`, acting as `|j⟩ ↦ (−1)^{a(j+b)} |j+b⟩`.
pub fn weyl_matrix(w: WeylLabel) -> Mat2 {
    let mut m = [[ZERO; 2]; 2];
    for j in 0..2usize {
        let out = j ^ w.b() as usize;
        let sign = if w.a() && out == 1 { -1.0 } else { 1.0 };
        m[out][j] = Complex64::new(sign, 0.0);
    }
    m
}

pub fn identity2() -> Mat2 {
    [[ONE, ZERO], [ZERO, ONE]]
}

pub fn mul2(x: &Mat2, y: &Mat2) -> Mat2 {
    let mut m = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = x[i][0] * y[0][j] + x[i][1] * y[1][j];
        }
    }
    m
}

pub fn dagger2(x: &Mat2) -> Mat2 {
    let mut m = [[ZERO; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            m[i][j] = x[j][i].conj();
        }
    }
    m
}

pub fn scale2(x: &Mat2, s: f64) -> Mat2 {
    x.map(|row| row.map(|v| v * s))
}

pub fn approx_eq2(x: &Mat2, y: &Mat2, tol: f64) -> bool {
    x.iter().flatten().zip(y.iter().flatten()).all(|(a, b)| (a - b).norm() <= tol)
}

/// `A ⊗ B` with the first factor on the high index bit (`|x1 x2⟩ ↦ 2·x1 + x2`).
pub fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = a[i >> 1][j >> 1] * b[i & 1][j & 1];
        }
    }
    m
}

pub fn apply4(m: &Mat4, v: &Vec4) -> Vec4 {
    let mut out = [ZERO; 4];
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..4).map(|j| m[i][j] * v[j]).sum();
    }
    out
}

pub fn mul4(x: &Mat4, y: &Mat4) -> Mat4 {
    let mut m = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = (0..4).map(|k| x[i][k] * y[k][j]).sum();
        }
    }
    m
}

pub fn approx_eq4(x: &Mat4, y: &Mat4, tol: f64) -> bool {
    x.iter().flatten().zip(y.iter().flatten()).all(|(a, b)| (a - b).norm() <= tol)
}

/// `|Φ⟩ = (|00⟩ + |11⟩)/√2`.
pub fn phi_plus() -> Vec4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    [Complex64::new(h, 0.0), ZERO, ZERO, Complex64::new(h, 0.0)]
}

/// Bell-basis vector `W_1(w) |Φ⟩`.
pub fn bell_vector(w: WeylLabel) -> Vec4 {
    apply4(&kron(&weyl_matrix(w), &identity2()), &phi_plus())
}

/// Projector `W_1(w)|Φ⟩⟨Φ|W_1(w)†`.
pub fn bell_projector(w: WeylLabel) -> Mat4 {
    let v = bell_vector(w);
    let mut m = [[ZERO; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            m[i][j] = v[i] * v[j].conj();
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOL: f64 = 1e-12;

    fn sign(bit: bool) -> f64 {
        if bit {
            -1.0
        } else {
            1.0
        }
    }

    #[test]
    fn matches_pauli_products() {
        let x: Mat2 = [[ZERO, ONE], [ONE, ZERO]];
        let z: Mat2 = [[ONE, ZERO], [ZERO, -ONE]];
        assert!(approx_eq2(&weyl_matrix(WeylLabel::new(false, false)), &identity2(), TOL));
        assert!(approx_eq2(&weyl_matrix(WeylLabel::new(false, true)), &x, TOL));
        assert!(approx_eq2(&weyl_matrix(WeylLabel::new(true, false)), &z, TOL));
        assert!(approx_eq2(&weyl_matrix(WeylLabel::new(true, true)), &mul2(&z, &x), TOL));
    }

    #[test]
    fn transpose_rule() {
        for w in WeylLabel::all() {
            let m = weyl_matrix(w);
            assert!(approx_eq2(&dagger2(&m), &scale2(&m, sign(w.a() & w.b())), TOL));
        }
    }

    #[test]
    fn sum_rule() {
        for w1 in WeylLabel::all() {
            for w2 in WeylLabel::all() {
                let lhs = mul2(&weyl_matrix(w1), &weyl_matrix(w2));
                let rhs = scale2(&weyl_matrix(w1 + w2), sign(w2.a() & w1.b()));
                assert!(approx_eq2(&lhs, &rhs, TOL), "{w1} {w2}");
            }
        }
    }

    #[test]
    fn orthogonality_rule() {
        for w in WeylLabel::all() {
            let m = weyl_matrix(w);
            assert!(approx_eq2(&mul2(&dagger2(&m), &m), &identity2(), TOL));
            assert!(approx_eq2(&mul2(&m, &dagger2(&m)), &identity2(), TOL));
        }
    }

    #[test]
    fn system_moving_rule() {
        for w in WeylLabel::all() {
            let on_second = apply4(&kron(&identity2(), &weyl_matrix(w)), &phi_plus());
            let on_first = apply4(&kron(&weyl_matrix(w), &identity2()), &phi_plus());
            let s = sign(w.a() & w.b());
            for i in 0..4 {
                assert!((on_second[i] - on_first[i] * s).norm() <= TOL);
            }
        }
    }

    #[test]
    fn bell_projectors_form_a_pvm() {
        let mut sum = [[ZERO; 4]; 4];
        for w in WeylLabel::all() {
            let p = bell_projector(w);
            assert!(approx_eq4(&mul4(&p, &p), &p, TOL));
            for i in 0..4 {
                for j in 0..4 {
                    assert!((p[i][j] - p[j][i].conj()).norm() <= TOL);
                    sum[i][j] += p[i][j];
                }
            }
        }
        let mut id = [[ZERO; 4]; 4];
        for (i, row) in id.iter_mut().enumerate() {
            row[i] = ONE;
        }
        assert!(approx_eq4(&sum, &id, TOL));
    }
}
