//! JSON emission: `%.17g` numbers, exact round trips and stable bytes.

use std::ffi::CStr;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;

use cvxrw::emit::{format_g17, EmitDocument, StandardForm};
use cvxrw::expr::VarId;
use cvxrw::standard::{ConeData, ConeDims, LpData, QpData, VarSlot};

fn c_g17(v: f64) -> String {
    let mut buf = [0 as libc::c_char; 64];
    // SAFETY: the buffer is large enough for any %.17g output and is NUL-terminated by snprintf.
    unsafe {
        libc::snprintf(buf.as_mut_ptr(), buf.len(), c"%.17g".as_ptr(), v);
        CStr::from_ptr(buf.as_ptr()).to_string_lossy().into_owned()
    }
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        6 => any::<f64>().prop_filter("finite", |v| v.is_finite()),
        3 => (-1000i32..1000).prop_map(|k| f64::from(k) / 20.0),
        1 => prop::sample::select(vec![0.0, f64::INFINITY, f64::NEG_INFINITY, f64::NAN, f64::MIN_POSITIVE, f64::MAX, 5e-324, 1e17, 1e16, 1e-5, 1e-4]),
    ]
}

fn vector(n: usize) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(number(), n).prop_map(DVector::from_vec)
}

fn matrix(r: usize, c: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(number(), r * c).prop_map(move |v| DMatrix::from_vec(r, c, v))
}

fn slots(n: usize) -> impl Strategy<Value = Vec<VarSlot>> {
    // split 0..n into consecutive named blocks
    prop::collection::vec(any::<bool>(), n.saturating_sub(1)).prop_map(move |cuts| {
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=n {
            if i == n || cuts[i - 1] {
                let id = out.len() as u32;
                out.push(VarSlot { id: VarId(id), name: format!("v{id}"), start, len: i - start });
                start = i;
            }
        }
        out
    })
}

fn form() -> impl Strategy<Value = StandardForm> {
    (1usize..4, 0usize..4, 0usize..3).prop_flat_map(|(n, mg, me)| {
        let lp = (vector(n), number(), matrix(mg, n), vector(mg), matrix(me, n), vector(me), slots(n))
            .prop_map(|(c, offset, g, h, a, b, vars)| StandardForm::Lp(LpData { c, offset, g, h, a, b, vars }));
        let qp = (matrix(n, n), vector(n), number(), matrix(mg, n), vector(mg), matrix(me, n), vector(me), slots(n))
            .prop_map(|(p, q, r, g, h, a, b, vars)| StandardForm::Qp(QpData { p, q, r, g, h, a, b, vars }));
        let cone =
            (0usize..3, 0usize..3, prop::collection::vec(1usize..4, 0..3)).prop_flat_map(move |(zero, nonneg, soc)| {
                let m = zero + nonneg + soc.iter().sum::<usize>();
                let cones = ConeDims { zero, nonneg, soc };
                (vector(n), number(), matrix(m, n), vector(m), Just(cones), slots(n)).prop_map(
                    |(c, offset, a, b, cones, vars)| StandardForm::Cone(ConeData { c, offset, a, b, cones, vars }),
                )
            });
        prop_oneof![lp, qp, cone]
    })
}

fn numbers(f: &StandardForm) -> Vec<u64> {
    let all: Vec<f64> = match f {
        StandardForm::Lp(d) => {
            d.c.iter().chain([&d.offset]).chain(&d.g).chain(&d.h).chain(&d.a).chain(&d.b).copied().collect()
        }
        StandardForm::Qp(d) => {
            d.p.iter().chain(&d.q).chain([&d.r]).chain(&d.g).chain(&d.h).chain(&d.a).chain(&d.b).copied().collect()
        }
        StandardForm::Cone(d) => d.c.iter().chain([&d.offset]).chain(&d.a).chain(&d.b).copied().collect(),
    };
    all.iter().map(|v| if v.is_nan() { f64::NAN.to_bits() } else { v.to_bits() }).collect()
}

fn shape(f: &StandardForm) -> String {
    match f {
        StandardForm::Lp(d) => format!("lp {:?} {:?} {:?} {:?}", d.c.len(), d.g.shape(), d.a.shape(), d.vars),
        StandardForm::Qp(d) => format!("qp {:?} {:?} {:?} {:?}", d.p.shape(), d.g.shape(), d.a.shape(), d.vars),
        StandardForm::Cone(d) => format!("cone {:?} {:?} {:?}", d.a.shape(), d.cones, d.vars),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn finite_numbers_print_like_c(v in number()) {
        prop_assert_eq!(format_g17(v), c_g17(v));
        if v.is_finite() {
            prop_assert_eq!(format_g17(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn documents_round_trip_exactly(data in form(), chain in prop::collection::vec("[a-z_]{1,12}", 0..4)) {
        let doc = EmitDocument::new(chain.clone(), data);
        let text = doc.to_json();
        prop_assert_eq!(&text, &doc.to_json());
        let back = EmitDocument::from_json(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(&back.chain, &chain);
        prop_assert_eq!(shape(&back.data), shape(&doc.data));
        prop_assert_eq!(numbers(&back.data), numbers(&doc.data));
        prop_assert_eq!(back.to_json(), text);
    }

    #[test]
    fn truncated_documents_are_errors(data in form(), cut in any::<prop::sample::Index>()) {
        let text = EmitDocument::new(vec![], data).to_json();
        let trimmed = text.trim_end();
        let k = cut.index(trimmed.len());
        prop_assert!(EmitDocument::from_json(&trimmed[..k]).is_err());
    }
}
