use ki_twpa::circuit::{
    expand_fishbone, expand_leaf, Element, FishboneSpec, LadderNetwork, LeafSpec,
    NonlinearInductorSpec, ResonatorSpec, UnitCellSpec,
};
use ki_twpa::io::{parse_netlist, write_netlist};
use ki_twpa::linear::{element_matrix, LinearOptions};
use proptest::prelude::*;

fn fishbone() -> impl Strategy<Value = FishboneSpec> {
    (
        4usize..30,
        1e-12..1e-9f64,
        1e-15..1e-12f64,
        1.5..10.0f64,
        3usize..15,
    )
        .prop_flat_map(|(cpp, l0, c, factor, periods)| {
            (1..cpp, 0..=cpp).prop_map(move |(loaded, third)| FishboneSpec {
                base_cell: UnitCellSpec {
                    inductor: NonlinearInductorSpec { l0, i_star: 0.01 },
                    shunt_capacitance: c,
                },
                cells_per_period: cpp,
                loaded_cells: loaded,
                loaded_cells_every_third: third,
                capacitance_reduction_factor: factor,
                num_periods: periods,
                physical_cell_length: 8e-6,
            })
        })
}

fn leaf() -> impl Strategy<Value = LeafSpec> {
    (
        20usize..120,
        1usize..4,
        1usize..6,
        1usize..4,
        2e9..10e9f64,
        10.0..200.0f64,
    )
        .prop_map(|(period, pairs, sep, blocks, fr, q)| LeafSpec {
            base_cell: UnitCellSpec {
                inductor: NonlinearInductorSpec {
                    l0: 290e-12,
                    i_star: 0.01,
                },
                shunt_capacitance: 116e-15,
            },
            cells_per_block_period: period,
            resonator: ResonatorSpec {
                resonant_frequency: fr,
                loaded_q: q,
                pairs_per_block: pairs,
                pair_separation_cells: sep,
            },
            num_blocks: blocks,
        })
}

fn element() -> impl Strategy<Value = Element> {
    prop_oneof![
        (1e-13..1e-8f64).prop_map(|c| Element::ShuntCapacitor { c }),
        (1e8..1e11f64, 1.0..1e4f64, 1u32..5).prop_map(|(fr, q, m)| Element::ShuntResonator {
            resonant_frequency: fr,
            q,
            multiplicity: m
        }),
    ]
}

fn network() -> impl Strategy<Value = LadderNetwork> {
    prop::collection::vec(
        (
            (1e-13..1e-8f64, 1e-4..1.0f64),
            prop::collection::vec(element(), 1..3),
        ),
        1..40,
    )
    .prop_map(|cells| {
        let n = cells.len();
        let mut elements = Vec::new();
        for ((l0, i_star), shunts) in cells {
            elements.push(Element::SeriesInductor { l0, i_star });
            elements.extend(shunts);
        }
        LadderNetwork::new(elements, Some(n)).unwrap()
    })
}

proptest! {
    #[test]
    fn fishbone_repeats_every_three_supercells(spec in fishbone()) {
        prop_assume!(spec.validate().is_ok());
        let net = expand_fishbone(&spec).unwrap();
        let caps: Vec<f64> = net.cells().map(|c| c.capacitance()).collect();
        let p = 3 * spec.cells_per_period;
        for j in 0..caps.len().saturating_sub(p) {
            prop_assert_eq!(caps[j], caps[j + p]);
        }
        prop_assert_eq!(net.total_cells(), spec.total_cells());
    }

    #[test]
    fn total_inductance_is_cells_times_l0(spec in fishbone(), leaf in leaf()) {
        prop_assume!(spec.validate().is_ok() && leaf.validate().is_ok());
        let net = expand_fishbone(&spec).unwrap();
        prop_assert_eq!(net.total_series_inductance(), net.total_cells() as f64 * spec.base_cell.inductor.l0);
        let net = expand_leaf(&leaf).unwrap();
        prop_assert_eq!(net.total_series_inductance(), net.total_cells() as f64 * leaf.base_cell.inductor.l0);
    }

    #[test]
    fn combined_pair_admittance_is_twice_a_single_resonator(spec in leaf(), f in 0.1e9..30e9f64) {
        prop_assume!(spec.validate().is_ok());
        let net = expand_leaf(&spec).unwrap();
        let opts = LinearOptions::default();
        let mut seen = 0;
        for cell in net.cells().filter(|c| c.has_resonator()) {
            for e in cell.shunts {
                if let Element::ShuntResonator { resonant_frequency, q, multiplicity } = *e {
                    prop_assert_eq!(multiplicity, 2);
                    let single = Element::ShuntResonator { resonant_frequency, q, multiplicity: 1 };
                    let y_pair = element_matrix(e, f, &opts).c;
                    let y_one = element_matrix(&single, f, &opts).c;
                    prop_assert_eq!(y_pair, 2.0 * y_one);
                    seen += 1;
                }
            }
        }
        prop_assert_eq!(seen, spec.num_blocks * spec.resonator.pairs_per_block);
    }

    #[test]
    fn netlist_round_trip_is_exact(net in network()) {
        prop_assert_eq!(parse_netlist(&write_netlist(&net)).unwrap(), net);
    }
}

#[test]
fn expanded_presets_round_trip_through_netlist() {
    for net in [
        expand_fishbone(&FishboneSpec::nominal()).unwrap(),
        expand_leaf(&LeafSpec::nominal()).unwrap(),
    ] {
        assert_eq!(parse_netlist(&write_netlist(&net)).unwrap(), net);
    }
}
