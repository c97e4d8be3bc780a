//! Channel-level oracles: path gains, pdf normalisation, CDF identities.

use seaowc_core::common::{
    allocate_wavelengths, db_per_km_to_per_meter, pointing_constants, PointingGeometry, PointingSpec, Weather,
};
use seaowc_core::fso::{self, bs_cdf, bs_pdf, Direction, FsoParams, Strategy};
use seaowc_core::quadrature::{integrate, QuadratureSpec};
use seaowc_core::rf;
use seaowc_core::special::std_normal_cdf;
use seaowc_core::uwoc::{self, UwocParams};

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

fn tight() -> QuadratureSpec {
    QuadratureSpec {
        abs_tol: 1e-13,
        rel_tol: 1e-11,
        max_subdivisions: 4000,
        infinite_tail_transform: true,
    }
}

// -- shared pieces ----------------------------------------------------------

#[test]
fn geometry_reproduces_tabulated_pointing_pairs() {
    // Geometries solved offline (mpmath, 30 digits) from the tabulated pairs.
    let uw = pointing_constants(&PointingGeometry {
        beam_waist: 1.0,
        detector_radius: 0.199_530_687_586_398_78,
        jitter_std: 0.217_266_585_922_810_37,
    })
    .unwrap();
    assert!(rel(uw.ratio, 2.35) < 0.01 && rel(uw.cap, 0.0764) < 0.01, "{uw:?}");
    let air = pointing_constants(&PointingGeometry {
        beam_waist: 1.0,
        detector_radius: 0.099_764_647_312_171_61,
        jitter_std: 0.111_444_615_092_922_98,
    })
    .unwrap();
    assert!(rel(air.ratio, 4.51) < 0.01 && rel(air.cap, 0.0197) < 0.01, "{air:?}");
}

#[test]
fn pointing_ratio_halves_when_jitter_doubles() {
    let g = PointingGeometry {
        beam_waist: 0.8,
        detector_radius: 0.1,
        jitter_std: 0.05,
    };
    let a = pointing_constants(&g).unwrap();
    let b = pointing_constants(&PointingGeometry { jitter_std: 0.1, ..g }).unwrap();
    assert!(rel(b.ratio, a.ratio / 2.0) < 1e-14);
    assert_eq!(a.cap, b.cap);
}

#[test]
fn tiny_detector_collects_nothing() {
    let c = pointing_constants(&PointingGeometry {
        beam_waist: 1.0,
        detector_radius: 1e-9,
        jitter_std: 0.1,
    })
    .unwrap();
    assert!(c.cap < 1e-17);
}

#[test]
fn attenuation_conversion() {
    assert_eq!(db_per_km_to_per_meter(0.0), 0.0);
    let clear = Weather::Clear.attenuation_per_meter().unwrap();
    assert!(rel(clear, 0.44 * std::f64::consts::LN_10 / 1e4) < 1e-15);
    let foggy = Weather::Foggy.attenuation_per_meter().unwrap();
    assert!(rel(foggy / clear, 50.0 / 0.44) < 1e-14);
}

#[test]
fn wavelength_plan() {
    let w = allocate_wavelengths(3);
    assert_eq!(w[0], 532.0);
    // 1 / (1/532 - 1/3e7) at 30 digits
    assert!(rel(w[1], 532.009_434_300_634_931_26) < 1e-13);
    let mid = (1.0 / w[1] + 1.0 / w[2]) / 2.0;
    assert!(rel(mid, 1.0 / 532.0) < 1e-15);
    assert!(allocate_wavelengths(0).is_empty());
    let ten = allocate_wavelengths(10);
    for (i, a) in ten.iter().enumerate() {
        for b in &ten[i + 1..] {
            assert_ne!(a, b);
        }
        let rung = (1.0 / a - 1.0 / 532.0).abs() * 30e6;
        assert!((rung - rung.round()).abs() < 1e-6, "off-grid rung {rung}");
    }
}

// -- underwater hop -------------------------------------------------------

#[test]
fn underwater_path_gain() {
    // mpmath at 30 digits with the tabulated inputs
    let h = uwoc::path_loss(&UwocParams::default()).unwrap();
    assert!(rel(h, 4.012_075_860_889_430_4e-33) < 1e-12, "{h:e}");

    let clean = UwocParams {
        extinction: 0.0,
        ..Default::default()
    };
    let g = uwoc::path_loss(&clean).unwrap();
    let th = 5f64.to_radians();
    let expect = 1.7e-4 * th.cos() / (2.0 * std::f64::consts::PI * 350.0 * 350.0 * (1.0 - 60f64.to_radians().cos()));
    assert!(rel(g, expect) < 1e-14);
    let far = uwoc::path_loss(&UwocParams {
        distance: 700.0,
        ..clean
    })
    .unwrap();
    assert!(rel(far, g / 4.0) < 1e-14);
}

#[test]
fn underwater_turbulence_pdf_is_normalised_with_unit_mean() {
    let d = uwoc::derive(&UwocParams::default()).unwrap();
    let mass = integrate(|h| d.turbulence_pdf(h), 0.0, f64::INFINITY, &tight()).unwrap();
    assert!((mass - 1.0).abs() < 1e-8, "{mass}");
    let mean = integrate(|h| h * d.turbulence_pdf(h), 0.0, f64::INFINITY, &tight()).unwrap();
    assert!((mean - 1.0).abs() < 1e-8, "{mean}");
    assert!(d.turbulence_pdf(1e-12) < 1e-100);
}

#[test]
fn underwater_reference_pdf_is_normalised() {
    for distance in [150.0, 350.0, 700.0] {
        let d = uwoc::derive(&UwocParams {
            distance,
            ..Default::default()
        })
        .unwrap();
        let mass = d.reference_pdf_mass(&tight()).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "d = {distance}: {mass}");
    }
}

#[test]
fn underwater_reference_pdf_matches_brute_force_spot_values() {
    // f(h) = ∫ f_t(t) f_p(h / (h_l t)) / (h_l t) dt, pointing law on (0, h0]
    let d = uwoc::derive(&UwocParams::default()).unwrap();
    let (hl, h0, x2) = (d.path_loss, d.pointing.cap, d.pointing.ratio.powi(2));
    for frac in [0.25, 0.5, 0.75] {
        let h = frac * h0 * hl;
        let brute = integrate(
            |t| {
                let hp = h / (hl * t);
                if hp > h0 {
                    0.0
                } else {
                    d.turbulence_pdf(t) * x2 * hp.powf(x2 - 1.0) / h0.powf(x2) / (hl * t)
                }
            },
            h / (hl * h0),
            f64::INFINITY,
            &tight(),
        )
        .unwrap();
        let r = d.pdf_reference(h).unwrap();
        assert!(rel(r, brute) < 1e-7, "{frac}: {r:e} vs {brute:e}");
    }
}

#[test]
fn underwater_pdf_without_turbulence_is_the_pointing_law() {
    let d = uwoc::derive(&UwocParams {
        cn2: 1e-28,
        ..Default::default()
    })
    .unwrap();
    assert!(d.sigma2 < 1e-12);
    let (hl, h0, x2) = (d.path_loss, d.pointing.cap, d.pointing.ratio.powi(2));
    for frac in [0.2, 0.5, 0.8] {
        let h = frac * h0 * hl;
        let law = x2 * h.powf(x2 - 1.0) / (h0 * hl).powf(x2);
        let r = d.pdf_reference(h).unwrap();
        assert!(rel(r, law) < 1e-6, "{frac}: {r:e} vs {law:e}");
    }
}

#[test]
fn underwater_snr_cdf_properties() {
    let d = uwoc::derive(&UwocParams::default()).unwrap();
    let avg = 1e70;
    assert_eq!(d.snr_cdf_reference(0.0, avg).unwrap(), 0.0);
    let at_cap = avg * d.gain_scale().powi(2);
    let v = d.snr_cdf_reference(at_cap, avg).unwrap();
    // below one, above the turbulence-only mass P(h_t <= 1)
    assert!(v < 1.0 && v >= d.turbulence_cdf(1.0), "{v}");
    // scale invariance
    let a = d.snr_cdf_reference(3.0 * at_cap, avg).unwrap();
    let b = d.snr_cdf_reference(3.0 * at_cap * 7.0, avg * 7.0).unwrap();
    assert!(rel(a, b) < 1e-12);
    let mut last = 0.0;
    for i in 0..60 {
        let g = at_cap * 10f64.powf(-6.0 + i as f64 * 0.15);
        let f = d.snr_cdf_reference(g, avg).unwrap();
        assert!((0.0..=1.0).contains(&f) && f >= last - 1e-15);
        last = f;
    }
}

#[test]
fn printed_underwater_cdf_limits_and_monotonicity() {
    let d = uwoc::derive(&UwocParams::default()).unwrap();
    let avg = 1e70;
    assert_eq!(d.snr_cdf_paper(0.0, avg), 0.0);
    assert!(d.snr_cdf_paper(1e-300, avg) < 1e-100);
    let mut last = 0.0;
    for i in 0..100 {
        let g = avg * 10f64.powf(-6.0 + 8.0 * i as f64 / 99.0);
        let f = d.snr_cdf_paper(g, avg);
        assert!(f >= last, "printed CDF decreased at γ/γ̄ = {}", g / avg);
        last = f;
    }
    assert!(d.pdf_paper(1e-300) == 0.0 || d.pdf_paper(1e-300) < 1e-100);
    assert!(d.pdf_paper(1e3 * d.gain_scale()) < 1e-100);
}

// -- air hop ----------------------------------------------------------------

#[test]
fn air_path_gain() {
    let p = FsoParams::default();
    let up = fso::path_loss(&p, Direction::Uplink).unwrap();
    assert!(rel(up, 2.307_282_623_738_043_5e-9) < 1e-12, "{up:e}");
    let foggy = fso::path_loss(
        &FsoParams {
            weather: Weather::Foggy,
            ..p.clone()
        },
        Direction::Uplink,
    )
    .unwrap();
    let ratio = (-(Weather::Foggy.attenuation_per_meter().unwrap() - Weather::Clear.attenuation_per_meter().unwrap())
        * 1000.0)
        .exp();
    assert!(rel(foggy / up, ratio) < 1e-12);
    let calm = fso::path_loss(
        &FsoParams {
            weather: Weather::Custom(1e-300),
            ..p
        },
        Direction::Uplink,
    )
    .unwrap();
    assert!(rel(calm, 7e-4 / (30f64.to_radians() * 1000.0).powi(2)) < 1e-14);
}

#[test]
fn birnbaum_saunders_pdf_and_cdf_agree() {
    let (a, b) = (0.6866, 0.8093);
    let mass = integrate(|t| bs_pdf(t, a, b), 0.0, f64::INFINITY, &tight()).unwrap();
    assert!((mass - 1.0).abs() < 1e-8);
    assert!((bs_cdf(b, a, b) - 0.5).abs() < 1e-15);
    for t in [0.1, 0.4, 0.8093, 1.3, 2.5, 6.0] {
        let q = integrate(|u| bs_pdf(u, a, b), 0.0, t, &tight()).unwrap();
        let closed = std_normal_cdf(((t / b).sqrt() - (b / t).sqrt()) / a);
        assert!((q - closed).abs() <= 1e-8, "t = {t}: {q} vs {closed}");
    }
}

#[test]
fn air_reference_pdf_is_normalised_in_all_weather() {
    for w in [Weather::Clear, Weather::Snowy, Weather::Foggy] {
        let d = fso::derive(&FsoParams {
            weather: w,
            ..Default::default()
        })
        .unwrap();
        let mass = d.ds_reference_pdf_mass(&tight()).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "{}: {mass}", w.name());
    }
}

#[test]
fn air_reference_pdf_matches_brute_force_spot_values() {
    let d = fso::derive(&FsoParams::default()).unwrap();
    let dir = Direction::Uplink;
    let (il, i0, z2) = (d.path_loss(dir), d.pointing.cap, d.pointing.ratio.powi(2));
    for frac in [0.1, 0.5, 0.9] {
        let i = frac * i0 * il * d.beta;
        let brute = integrate(
            |t| {
                let ip = i / (il * t);
                if ip > i0 {
                    0.0
                } else {
                    bs_pdf(t, d.alpha, d.beta) * z2 * ip.powf(z2 - 1.0) / i0.powf(z2) / (il * t)
                }
            },
            i / (il * i0),
            f64::INFINITY,
            &tight(),
        )
        .unwrap();
        let r = d.ds_pdf_reference(i, dir).unwrap();
        assert!(rel(r, brute) < 1e-7, "{frac}: {r:e} vs {brute:e}");
    }
}

#[test]
fn printed_air_pdf_vanishes_far_out() {
    let d = fso::derive(&FsoParams::default()).unwrap();
    let il = d.path_loss(Direction::Uplink);
    let v = d.ds_pdf_paper(1e3 * il, Direction::Uplink).unwrap();
    assert!(v.abs() < 1e-30 * (1.0 / il), "{v:e}");
}

#[test]
fn printed_air_cdf_is_zero_at_zero_and_monotone() {
    let d = fso::derive(&FsoParams::default()).unwrap();
    let dir = Direction::Uplink;
    let avg = 1.0 / d.path_loss(dir).powi(2);
    assert_eq!(d.ds_snr_cdf_paper(0.0, avg, dir).unwrap(), 0.0);
    let mut last = f64::NEG_INFINITY;
    for i in 0..60 {
        let g = avg * d.path_loss(dir).powi(2) * 10f64.powf(-8.0 + i as f64 * 0.1);
        let f = d.ds_snr_cdf_paper(g, avg, dir).unwrap();
        assert!(f >= last, "printed DS CDF decreased at {g:e}");
        last = f;
    }
}

#[test]
fn retro_cdf_identities() {
    let d = fso::derive(&FsoParams::default()).unwrap();
    for dir in [Direction::Uplink, Direction::Downlink] {
        let j = d.index(dir) as i32;
        let avg = 3.7e12;
        let il = d.path_loss(dir);
        let median = avg * (d.beta * il).powi(2 * j);
        assert!((d.rrs_snr_cdf(median, avg, dir).unwrap() - 0.5).abs() < 1e-12);
        assert_eq!(d.rrs_snr_cdf(0.0, avg, dir).unwrap(), 0.0);
        let mut last = 0.0;
        for k in 1..50 {
            let g = median * 10f64.powf(-3.0 + k as f64 * 0.12);
            let f = d.rrs_snr_cdf(g, avg, dir).unwrap();
            assert!(f > last || f == 1.0, "not increasing at {g:e}");
            last = f;
        }
    }
    // uplink: γ = γ̃ I², so the CDF at γ̃ t² is the BS CDF at t / I_l
    let il = d.path_loss(Direction::Uplink);
    for t in [0.3, 0.9, 1.7] {
        let i = t * il;
        let v = d.rrs_snr_cdf(5.0 * i * i, 5.0, Direction::Uplink).unwrap();
        assert!((v - bs_cdf(t, d.alpha, d.beta)).abs() <= 1e-12);
    }
}

#[test]
fn retro_strategy_has_no_pointing_loss_in_its_cdf() {
    let d = fso::derive(&FsoParams::default()).unwrap();
    let dir = Direction::Uplink;
    let il = d.path_loss(dir);
    let g = 0.5 * il * il;
    let ds = d.snr_cdf_reference(Strategy::Direct, g, 1.0, dir).unwrap();
    let rrs = d.snr_cdf_reference(Strategy::RetroReflect, g, 1.0, dir).unwrap();
    assert!(rrs < ds, "pointing loss should only worsen the direct link");
}

#[test]
fn pointing_geometry_in_config_overrides_constants() {
    let spec = PointingSpec {
        ratio: 99.0,
        cap: 0.9,
        geometry: Some(PointingGeometry {
            beam_waist: 1.0,
            detector_radius: 0.2,
            jitter_std: 0.2,
        }),
    };
    assert_ne!(spec.resolve().unwrap().ratio, 99.0);
}

// -- RF hop -------------------------------------------------------------------

#[test]
fn rf_closed_cdf_matches_pdf_quadrature() {
    let mut n = 0;
    for m in [0.5, 1.0, 2.3, 4.0] {
        for (avg, g) in [(10.0, 0.3), (10.0, 4.0), (100.0, 50.0), (1e3, 2e3), (3.0, 30.0)] {
            let q = integrate(|x| rf::snr_pdf(x, avg, m), 0.0, g, &tight()).unwrap();
            let c = rf::snr_cdf(g, avg, m).unwrap();
            assert!((q - c).abs() <= 1e-8, "m={m} avg={avg} γ={g}: {q} vs {c}");
            n += 1;
        }
    }
    assert_eq!(n, 20);
}

#[test]
fn rf_pdf_is_normalised() {
    for m in [0.5, 1.0, 3.5] {
        let mass = integrate(|x| rf::snr_pdf(x, 50.0, m), 0.0, f64::INFINITY, &tight()).unwrap();
        assert!((mass - 1.0).abs() < 1e-8, "m={m}: {mass}");
        let amp = integrate(|g| rf::amplitude_pdf(g, m, 2.0), 0.0, f64::INFINITY, &tight()).unwrap();
        assert!((amp - 1.0).abs() < 1e-8, "m={m}: {amp}");
    }
}

#[test]
fn rf_path_gain_is_off_by_default() {
    let p = rf::RfParams::default();
    assert_eq!(p.snr_scale(), 1.0);
    let g = rf::RfPathGain {
        distance_m: 100.0,
        shadowing_db: -3.0,
    };
    let fs = -20.0 * (4.0 * std::f64::consts::PI * 1.9e9 / 3e8).log10();
    assert!((g.gain_db(1.9e9) - (fs - 54.0 - 3.0)).abs() < 1e-9);
}
