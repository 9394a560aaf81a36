use super::*;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn h(twice: u32) -> HalfInt {
    HalfInt::from_twice(twice)
}

/// Spin matrices (Jz, J+) in the |j m> basis, m descending.
fn spin_matrices(j: HalfInt) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = j.multiplicity() as usize;
    let jv = j.value();
    let m_of = |k: usize| jv - k as f64;
    let jz = DMatrix::from_fn(n, n, |r, c| if r == c { m_of(r) } else { 0.0 });
    // <m+1| J+ |m> = sqrt(j(j+1) - m(m+1)); row index r holds m_of(r).
    let jp = DMatrix::from_fn(n, n, |r, c| {
        if c == r + 1 {
            let m = m_of(c);
            (jv * (jv + 1.0) - m * (m + 1.0)).sqrt()
        } else {
            0.0
        }
    });
    (jz, jp)
}

/// Brute-force hyperfine spectrum: builds I.J in the product basis, forms the
/// dipole + quadrupole Hamiltonian, diagonalises it, and labels each
/// eigenvalue by the expectation value of F^2. Returns (F(F+1), energy) pairs.
fn operator_spectrum(i: HalfInt, j: HalfInt, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (iz, ip) = spin_matrices(i);
    let (jz, jp) = spin_matrices(j);
    let im = ip.transpose();
    let jm = jp.transpose();

    let idotj = iz.kronecker(&jz) + (ip.kronecker(&jm) + im.kronecker(&jp)) * 0.5;
    let n = idotj.nrows();
    let eye = DMatrix::<f64>::identity(n, n);
    let (ii, jj) = (i.casimir(), j.casimir());

    let mut ham = &idotj * a;
    if b != 0.0 {
        let (iv, jv) = (i.value(), j.value());
        let q = (&idotj * &idotj) * 3.0 + &idotj * 1.5 - &eye * (ii * jj);
        ham += q * (b / (2.0 * iv * (2.0 * iv - 1.0) * jv * (2.0 * jv - 1.0)));
    }

    // F^2 = I^2 + J^2 + 2 I.J
    let f2 = &eye * (ii + jj) + &idotj * 2.0;

    let eig = ham.symmetric_eigen();
    (0..n)
        .map(|k| {
            let v = eig.eigenvectors.column(k);
            let ff = (v.transpose() * &f2 * v)[(0, 0)];
            (ff, eig.eigenvalues[k])
        })
        .collect()
}

#[test]
fn oracle_matches_closed_form_for_137_d32() {
    let iso = isotope(137).unwrap();
    let (a, b) = (iso.a_constant(Term::D32), iso.b_constant(Term::D32));
    assert_eq!((a, b), (189.7288, 44.5417));
    let spectrum = operator_spectrum(iso.spin, Term::D32.j(), a, b);
    assert_eq!(spectrum.len(), 16);
    for f in HalfInt::couple(iso.spin, Term::D32.j()) {
        let closed = hyperfine_energy(iso.spin, Term::D32.j(), f, a, b).unwrap();
        let members: Vec<_> = spectrum
            .iter()
            .filter(|(ff, _)| (ff - f.casimir()).abs() < 1e-6)
            .collect();
        assert_eq!(members.len() as u32, f.multiplicity(), "F = {f}");
        for (_, e) in members {
            assert!((e - closed).abs() < 1e-9, "F = {f}: {e} vs {closed}");
        }
    }
}

#[test]
fn oracle_matches_closed_form_for_135_and_133() {
    for (mass, term) in [(135, Term::D32), (135, Term::S12), (133, Term::D32), (133, Term::P12)] {
        let iso = isotope(mass).unwrap();
        let (a, b) = (iso.a_constant(term), iso.b_constant(term));
        let spectrum = operator_spectrum(iso.spin, term.j(), a, b);
        for f in HalfInt::couple(iso.spin, term.j()) {
            let closed = hyperfine_energy(iso.spin, term.j(), f, a, b).unwrap();
            for (ff, e) in &spectrum {
                if (ff - f.casimir()).abs() < 1e-6 {
                    assert!((e - closed).abs() < 1e-9 * closed.abs().max(1.0));
                }
            }
        }
    }
}

#[test]
fn splittings_of_133() {
    let iso = isotope(133).unwrap();
    let d1 = splitting(&iso, Term::S12, h(0), h(2)).unwrap();
    let d2 = splitting(&iso, Term::P12, h(0), h(2)).unwrap();
    let d3 = splitting(&iso, Term::D32, h(4), h(2)).unwrap();
    assert!((d1 - -9925.45355459).abs() < 1e-9);
    assert!((d2 - -1840.0).abs() < 1e-9);
    // F=1 minus F=2 in D3/2 is 2A for I = 1/2.
    assert!((d3 - 937.0).abs() < 1e-9);
    assert!((d1.abs() - 9931.0).abs() < 25.0);
    assert!((d3 - 937.0).abs() < 25.0);
}

#[test]
fn level_ordering_of_133() {
    let iso = isotope(133).unwrap();
    // all A < 0: S F=1 below F=0, P F=1 below F=0, D F=2 below F=1
    assert!(splitting(&iso, Term::S12, h(0), h(2)).unwrap() < 0.0);
    assert!(splitting(&iso, Term::P12, h(0), h(2)).unwrap() < 0.0);
    assert!(splitting(&iso, Term::D32, h(2), h(4)).unwrap() < 0.0);
}

#[test]
fn spinless_level_is_zero() {
    for j in [h(1), h(3)] {
        assert_eq!(hyperfine_energy(h(0), j, j, 123.0, 0.0).unwrap(), 0.0);
    }
}

#[test]
fn hyperfine_energy_errors() {
    assert!(matches!(
        hyperfine_energy(h(1), h(1), h(4), 1.0, 0.0),
        Err(SpectraError::InvalidF { .. })
    ));
    assert!(matches!(
        hyperfine_energy(h(1), h(1), h(1), 1.0, 0.0),
        Err(SpectraError::InvalidF { .. })
    ));
    assert!(matches!(
        hyperfine_energy(h(1), h(3), h(2), 1.0, 5.0),
        Err(SpectraError::QuadrupoleNotAllowed { .. })
    ));
    assert!(matches!(
        hyperfine_energy(h(3), h(1), h(2), 1.0, 5.0),
        Err(SpectraError::QuadrupoleNotAllowed { .. })
    ));
}

#[test]
fn spinless_lines_equal_table_shifts() {
    for iso in registry().iter().filter(|r| r.spin == HalfInt::ZERO) {
        for branch in Branch::ALL {
            let line = transition_line(iso, branch, None).unwrap();
            assert_eq!(line.offset, iso.shift(branch).value);
            assert!(line.allowed);
        }
    }
    let l136 = transition_line(&isotope(136).unwrap(), Branch::Blue, None).unwrap();
    assert_eq!(l136.offset, 179.4);
    let l138 = transition_line(&isotope(138).unwrap(), Branch::Red, None).unwrap();
    assert_eq!(l138.offset, 0.0);
}

#[test]
fn transition_line_argument_errors() {
    let i136 = isotope(136).unwrap();
    let i133 = isotope(133).unwrap();
    assert!(matches!(
        transition_line(&i136, Branch::Blue, Some((h(1), h(1)))),
        Err(SpectraError::HyperfineOnSpinless(136))
    ));
    assert!(matches!(
        transition_line(&i133, Branch::Blue, None),
        Err(SpectraError::MissingF(133))
    ));
    assert!(transition_line(&i133, Branch::Blue, Some((h(4), h(0)))).is_err());
}

#[test]
fn cooling_line_of_133_near_fig1c_carrier() {
    let iso = isotope(133).unwrap();
    let line = transition_line(&iso, Branch::Blue, Some((h(2), h(0)))).unwrap();
    // 373 + (-3/4)(-1840) - (1/4)(-9925.45355459)
    let expected = 373.0 + 1380.0 + 9925.45355459 / 4.0;
    assert!((line.offset - expected).abs() < 1e-9);
    assert!((line.offset - 4234.363).abs() < 1e-3);
    // carrier 4218(10) sits ~30 MHz red of resonance; combined band 20 + 4 + 10
    let residual = line.offset - (4218.0 + 30.0);
    assert!(residual.abs() < 34.0, "residual {residual}");
}

#[test]
fn red_repump_spacing_of_133() {
    let iso = isotope(133).unwrap();
    let nu0 = transition_line(&iso, Branch::Red, Some((h(2), h(0)))).unwrap();
    let nu1 = transition_line(&iso, Branch::Red, Some((h(4), h(2)))).unwrap();
    let diff = nu0.offset - nu1.offset;
    assert!((diff - 903.0).abs() < 1e-9);
    assert!((diff - 904.0).abs() <= 2.0);
}

#[test]
fn selection_rule_flags() {
    let iso = isotope(133).unwrap();
    let b = transition_lines(&iso, Branch::Blue);
    assert_eq!(b.len(), 4);
    let forbidden: Vec<_> = b.iter().filter(|l| !l.allowed).collect();
    assert_eq!(forbidden.len(), 1);
    assert_eq!((forbidden[0].f_lower, forbidden[0].f_upper), (h(0), h(0)));

    let r = transition_lines(&iso, Branch::Red);
    // D F=2 -> P F=0 is dF = 2
    let bad: Vec<_> = r.iter().filter(|l| !l.allowed).map(|l| (l.f_lower, l.f_upper)).collect();
    assert_eq!(bad, vec![(h(4), h(0))]);
    assert!(!dipole_allowed(h(0), h(0)));
    assert!(dipole_allowed(h(2), h(0)));
    assert!(dipole_allowed(h(3), h(1)));
    assert!(!dipole_allowed(h(5), h(1)));
}

#[test]
fn eom_drive_relation() {
    // Fluorescence peaks where 2 nu0 = D1 + D2.
    let iso = isotope(133).unwrap();
    let d1 = splitting(&iso, Term::S12, h(2), h(0)).unwrap();
    let d2 = splitting(&iso, Term::P12, h(2), h(0)).unwrap();
    let l10 = transition_line(&iso, Branch::Blue, Some((h(2), h(0)))).unwrap().offset;
    let l01 = transition_line(&iso, Branch::Blue, Some((h(0), h(2)))).unwrap().offset;
    assert!(((l10 - l01) - (d1 + d2)).abs() < 1e-9);
    assert!(((d1 + d2) / 2.0 - 5882.727).abs() < 1e-3);
}

#[test]
fn embedded_table_round_trips_as_text() {
    for (row, rec) in TABLE.iter().zip(registry()) {
        assert_eq!(rec.mass_number.to_string(), row[0]);
        assert_eq!(rec.spin.to_string(), row[1]);
        assert_eq!(rec.shift_b.text(), row[2]);
        assert_eq!(rec.shift_r.text(), row[3]);
        let opt = |m: &Option<Measured>| m.as_ref().map(|m| m.text().to_string()).unwrap_or_default();
        assert_eq!(opt(&rec.a_s12), row[4]);
        assert_eq!(opt(&rec.a_p12), row[5]);
        assert_eq!(opt(&rec.a_d32), row[6]);
        assert_eq!(opt(&rec.b_d32), row[7]);
    }
    let r133 = isotope(133).unwrap();
    assert_eq!(r133.shift_r.sys, 20.0);
    assert_eq!(r133.shift_b.sys, 0.0);
    assert_eq!(r133.to_fields()[3], "198(4)[20]");
}

#[test]
fn record_invariants_enforced() {
    let bad_ref = ["138", "0", "1", "0", "", "", "", ""];
    assert!(IsotopeRecord::from_fields(&bad_ref).is_err());
    let spinless_with_a = ["136", "0", "1", "0", "5", "", "", ""];
    assert!(IsotopeRecord::from_fields(&spinless_with_a).is_err());
    let half_with_b = ["133", "1/2", "1", "0", "1", "1", "1", "3"];
    assert!(IsotopeRecord::from_fields(&half_with_b).is_err());
    let missing_a = ["133", "1/2", "1", "0", "1", "", "1", ""];
    assert!(IsotopeRecord::from_fields(&missing_a).is_err());
}

fn spin_strategy() -> impl Strategy<Value = HalfInt> {
    (0u32..=7).prop_map(HalfInt::from_twice)
}

proptest! {
    #[test]
    fn weighted_centroid_is_zero(i in spin_strategy(), j in 1u32..=5, a in -1e4f64..1e4, b in -1e3f64..1e3) {
        let j = HalfInt::from_twice(j);
        let b = if i.twice() >= 2 && j.twice() >= 2 { b } else { 0.0 };
        let sum: f64 = HalfInt::couple(i, j)
            .map(|f| f64::from(f.multiplicity()) * hyperfine_energy(i, j, f, a, b).unwrap())
            .sum();
        prop_assert!(sum.abs() < 1e-9 * (1.0 + a.abs() + b.abs()), "sum = {sum}");
    }

    #[test]
    fn linear_in_each_constant(i in 2u32..=7, j in 2u32..=5, a1 in -1e3f64..1e3, a2 in -1e3f64..1e3, b1 in -1e3f64..1e3, b2 in -1e3f64..1e3) {
        let (i, j) = (HalfInt::from_twice(i), HalfInt::from_twice(j));
        for f in HalfInt::couple(i, j) {
            let e = |a, b| hyperfine_energy(i, j, f, a, b).unwrap();
            let lhs = e(a1 + a2, b1 + b2);
            let rhs = e(a1, b1) + e(a2, b2);
            prop_assert!((lhs - rhs).abs() < 1e-9 * (1.0 + lhs.abs()));
        }
    }
}
