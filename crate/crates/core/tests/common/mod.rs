#![allow(dead_code)]

use coflow_core::forms::{Basis, G2Point, InvariantForm, StructureKind};
use coflow_core::jet::{CJet, RJet};
use num_complex::Complex64;
use proptest::prelude::*;

pub fn jet(v: [f64; 5]) -> RJet {
    RJet::new(v[0], [v[1], v[2], v[3], v[4]])
}

pub fn arb_jet(lo: f64, hi: f64) -> impl Strategy<Value = RJet> {
    (lo..hi, prop::array::uniform4(-1.0..1.0f64)).prop_map(|(v, d)| RJet::new(v, d))
}

pub fn arb_cjet() -> impl Strategy<Value = CJet> {
    (arb_jet(-1.0, 1.0), arb_jet(-1.0, 1.0)).prop_map(|(a, b)| CJet::from_parts(&a, &b))
}

pub fn arb_structure() -> impl Strategy<Value = StructureKind> {
    prop_oneof![Just(StructureKind::CalabiYau), Just(StructureKind::NearlyKahler)]
}

/// A point with arbitrary positive `h`, `G` jets; no constraint imposed.
pub fn arb_point() -> impl Strategy<Value = G2Point> {
    (arb_jet(0.5, 2.5), arb_jet(-3.0, 3.0), arb_jet(0.5, 2.0), arb_structure())
        .prop_map(|(h, th, g, s)| G2Point::new(0.0, h, th, g, s).unwrap())
}

/// A point satisfying the coclosed constraint to all jet orders.
pub fn arb_coclosed_point() -> impl Strategy<Value = G2Point> {
    (0.5..2.5f64, arb_jet(-3.0, 3.0), arb_jet(0.5, 2.0), arb_structure()).prop_map(|(h0, th, g, s)| {
        let h = match s {
            StructureKind::CalabiYau => RJet::constant(h0),
            StructureKind::NearlyKahler => {
                let c = g * (th * 3.0).cos();
                RJet::new(h0, [c.value, c.d(1), c.d(2), c.d(3)])
            }
        };
        G2Point::new(0.0, h, th, g, s).unwrap()
    })
}

pub fn arb_form() -> impl Strategy<Value = InvariantForm> {
    (0u8..=7, prop::collection::vec(arb_cjet(), 12)).prop_map(|(deg, cs)| {
        Basis::ALL
            .into_iter()
            .filter(|b| b.degree() == deg)
            .zip(cs)
            .fold(InvariantForm::zero(deg), |acc, (b, c)| acc + InvariantForm::term(b, c))
    })
}

pub fn cjet_close(a: &CJet, b: &CJet) -> f64 {
    a.max_diff(b)
}

pub fn i() -> Complex64 {
    Complex64::new(0.0, 1.0)
}
