//! Max-min fair rate allocation by progressive filling.
//!
//! A flow uses a set of resources, each with a coefficient: a flow of rate
//! `r` consumes `coef * r` of the resource. Network links use coefficient 1
//! with capacity in bytes per second. A disk is one resource of capacity 1
//! where a read costs `1 / read_rate` and a write `1 / write_rate` per byte,
//! so reads and writes share the device.

/// One resource a flow crosses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Usage {
    pub resource: usize,
    pub coef: f64,
}

/// Rates for every flow. All unfrozen flows grow together; when a resource
/// saturates, the flows crossing it are frozen at the current level.
/// A flow without resources gets an infinite rate.
pub fn recompute_rates(flows: &[&[Usage]], capacities: &[f64]) -> Vec<f64> {
    let n = flows.len();
    let mut rate = vec![f64::INFINITY; n];
    let mut frozen = vec![false; n];
    let mut used = vec![0.0f64; capacities.len()];
    let mut users: Vec<Vec<(usize, f64)>> = vec![Vec::new(); capacities.len()];
    for (f, uses) in flows.iter().enumerate() {
        for u in uses.iter() {
            users[u.resource].push((f, u.coef));
        }
    }
    let mut left = flows.iter().filter(|u| !u.is_empty()).count();
    while left > 0 {
        // level at which each resource would saturate
        let mut level = f64::INFINITY;
        for (r, us) in users.iter().enumerate() {
            let weight: f64 = us.iter().filter(|(f, _)| !frozen[*f]).map(|(_, c)| c).sum();
            if weight > 0.0 {
                level = level.min(((capacities[r] - used[r]).max(0.0)) / weight);
            }
        }
        if !level.is_finite() {
            break;
        }
        let tol = level * 1e-12;
        let mut newly = Vec::new();
        for (r, us) in users.iter().enumerate() {
            let weight: f64 = us.iter().filter(|(f, _)| !frozen[*f]).map(|(_, c)| c).sum();
            if weight > 0.0 && ((capacities[r] - used[r]).max(0.0)) / weight <= level + tol {
                newly.extend(us.iter().filter(|(f, _)| !frozen[*f]).map(|(f, _)| *f));
            }
        }
        newly.sort_unstable();
        newly.dedup();
        for f in newly {
            frozen[f] = true;
            rate[f] = level;
            left -= 1;
            for u in flows[f].iter() {
                used[u.resource] += u.coef * level;
            }
        }
    }
    rate
}

/// Largest `load / capacity` over all resources.
pub fn max_utilization(flows: &[&[Usage]], rates: &[f64], capacities: &[f64]) -> f64 {
    let mut load = vec![0.0f64; capacities.len()];
    for (uses, r) in flows.iter().zip(rates) {
        for u in uses.iter() {
            load[u.resource] += u.coef * r;
        }
    }
    load.iter()
        .zip(capacities)
        .map(|(l, c)| l / c)
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn u(resource: usize) -> Usage {
        Usage { resource, coef: 1.0 }
    }

    fn rates(flows: &[Vec<Usage>], caps: &[f64]) -> Vec<f64> {
        let refs: Vec<&[Usage]> = flows.iter().map(Vec::as_slice).collect();
        recompute_rates(&refs, caps)
    }

    #[test]
    fn single_flow_gets_the_link() {
        assert_eq!(rates(&[vec![u(0)]], &[125e6]), vec![125e6]);
    }

    #[test]
    fn two_flows_share_an_uplink() {
        assert_eq!(rates(&[vec![u(0), u(1)], vec![u(0), u(2)]], &[10.0, 10.0, 10.0]), vec![5.0, 5.0]);
    }

    #[test]
    fn progressive_filling_example() {
        // X = 0 (cap 10): f1, f2; Y = 1 (cap 4): f2, f3
        let r = rates(&[vec![u(0)], vec![u(0), u(1)], vec![u(1)]], &[10.0, 4.0]);
        assert_eq!(r, vec![8.0, 2.0, 2.0]);
    }

    #[test]
    fn disk_shared_between_read_and_write() {
        // read at 500 B/s alone, write at 250 B/s alone; together equal rates r
        // with r/500 + r/250 = 1
        let disk = |c: f64| Usage { resource: 0, coef: c };
        let r = rates(&[vec![disk(1.0 / 500.0)], vec![disk(1.0 / 250.0)]], &[1.0]);
        let expect = 1.0 / (1.0 / 500.0 + 1.0 / 250.0);
        assert!((r[0] - expect).abs() < 1e-9 && (r[1] - expect).abs() < 1e-9);
    }

    /// Max-min oracle check: every flow has a saturated resource on which
    /// no other flow gets a strictly larger rate.
    fn is_max_min(flows: &[Vec<Usage>], caps: &[f64], r: &[f64]) -> bool {
        let mut load = vec![0.0; caps.len()];
        for (f, uses) in flows.iter().enumerate() {
            for x in uses {
                load[x.resource] += x.coef * r[f];
            }
        }
        flows.iter().enumerate().all(|(f, uses)| {
            uses.iter().any(|x| {
                let saturated = load[x.resource] >= caps[x.resource] * (1.0 - 1e-9);
                let top = flows
                    .iter()
                    .enumerate()
                    .filter(|(_, us)| us.iter().any(|y| y.resource == x.resource))
                    .all(|(g, _)| r[g] <= r[f] * (1.0 + 1e-9));
                saturated && top
            })
        })
    }

    proptest! {
        #[test]
        fn conservation_and_bottleneck(
            caps in prop::collection::vec(1.0f64..100.0, 1..6),
            raw in prop::collection::vec(prop::collection::btree_map(0usize..6, 0.1f64..3.0, 1..4), 1..10),
        ) {
            let flows: Vec<Vec<Usage>> = raw
                .iter()
                .map(|m| {
                    let mut v: Vec<Usage> = m
                        .iter()
                        .map(|(&r, &c)| Usage { resource: r % caps.len(), coef: c })
                        .collect();
                    v.sort_by_key(|x| x.resource);
                    v.dedup_by_key(|x| x.resource);
                    v
                })
                .collect();
            let refs: Vec<&[Usage]> = flows.iter().map(Vec::as_slice).collect();
            let r = recompute_rates(&refs, &caps);
            prop_assert!(r.iter().all(|x| x.is_finite() && *x > 0.0));
            prop_assert!(max_utilization(&refs, &r, &caps) <= 1.0 + 1e-9);
            prop_assert!(is_max_min(&flows, &caps, &r));
        }
    }
}
