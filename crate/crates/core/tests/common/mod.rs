//! Independent readers of the coordinator's event log.

#![allow(dead_code)]

use std::collections::BTreeMap;

/// Numbers recomputed from one event log.
#[derive(Debug, Clone, PartialEq)]
pub struct Recount {
    pub handovers: u64,
    pub ok_verdicts: u64,
    pub delivered_bits: f64,
    /// Uncapped achieved bits, in report order.
    pub achieved_bits: f64,
    /// Per report line, the serving cell.
    pub serving: Vec<usize>,
    pub mean_qos: f64,
    pub epochs: usize,
    /// Per epoch, the reported serving-cell census.
    pub census: Vec<Vec<usize>>,
    /// Per epoch, the broadcast load vector.
    pub loads: Vec<Vec<usize>>,
}

/// Recounts handovers from serving-cell changes between consecutive reports
/// (starting from the initial attachments), and throughput/QoS from the
/// report lines alone.
pub fn recount(lines: &[String], num_bs: usize) -> Recount {
    assert_eq!(lines.first().map(String::as_str), Some("# cellbalance-events v1"));
    let mut serving: BTreeMap<usize, usize> = BTreeMap::new();
    let mut handovers = 0;
    let mut ok_verdicts = 0;
    let mut delivered_bits = 0.0;
    let mut achieved_bits = 0.0;
    let mut serving_seq = Vec::new();
    let mut qos_sum = 0.0;
    let mut qos_n = 0usize;
    let mut census: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut loads: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut epoch_delivered: BTreeMap<usize, f64> = BTreeMap::new();
    let mut epoch_qos: BTreeMap<usize, f64> = BTreeMap::new();
    for line in &lines[1..] {
        let f: Vec<&str> = line.split(',').collect();
        let epoch: usize = f[0].parse().unwrap();
        match f[1] {
            "attach" => {
                serving.insert(f[2].parse().unwrap(), f[3].parse().unwrap());
            }
            "load" => {
                loads.insert(epoch, f[2].split(';').map(|x| x.parse().unwrap()).collect());
            }
            "req" => {}
            "verdict" => {
                if f[3] == "ok" {
                    ok_verdicts += 1;
                }
            }
            "report" => {
                let ue: usize = f[2].parse().unwrap();
                let bs: usize = f[3].parse().unwrap();
                let prev = serving.insert(ue, bs).expect("report for unattached ue");
                if prev != bs {
                    handovers += 1;
                }
                census.entry(epoch).or_insert_with(|| vec![0; num_bs])[bs] += 1;
                let achieved: f64 = f[6].parse().unwrap();
                achieved_bits += achieved;
                serving_seq.push(bs);
                let demand: f64 = f[7].parse().unwrap();
                *epoch_delivered.entry(epoch).or_insert(0.0) += achieved.min(demand);
                *epoch_qos.entry(epoch).or_insert(0.0) += f[8].parse::<f64>().unwrap();
                qos_n += 1;
            }
            other => panic!("unknown event kind {other}"),
        }
    }
    // Same grouping as the harness: per-epoch sums, then across epochs.
    for v in epoch_delivered.values() {
        delivered_bits += v;
    }
    for v in epoch_qos.values() {
        qos_sum += v;
    }
    Recount {
        handovers,
        ok_verdicts,
        delivered_bits,
        achieved_bits,
        serving: serving_seq,
        mean_qos: qos_sum / qos_n as f64,
        epochs: census.len(),
        census: census.into_values().collect(),
        loads: loads.into_values().collect(),
    }
}
