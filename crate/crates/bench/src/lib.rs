//! Shared fixtures for the criterion benchmarks in `benches/`.

use heatkern::FieldData;

pub const BOX_LENGTH: f64 = 2.0 * std::f64::consts::PI;

/// A 1-d potential with a handful of excited modes — enough structure that
/// mode sums in the trace evaluation do real work.
pub fn multi_mode_potential() -> FieldData {
    let mut fields = FieldData::single_cosine_u(1, BOX_LENGTH, 1, &[1], 0.4).unwrap();
    for (k, amp) in [(2, 0.25), (3, 0.1), (5, 0.05)] {
        let extra = FieldData::single_cosine_u(1, BOX_LENGTH, 1, &[k], amp).unwrap();
        fields = merge(fields, extra);
    }
    fields
}

fn merge(a: FieldData, b: FieldData) -> FieldData {
    let mut u = a.u_modes().clone();
    for (n, amp) in b.u_modes() {
        *u.entry(n.clone()).or_default() += amp;
    }
    FieldData::new(a.d(), a.box_length(), a.bundle_dim(), u, a.a_modes().to_vec()).unwrap()
}
