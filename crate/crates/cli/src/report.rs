use anyhow::Result;
use serde::Serialize;
use slackcrn::{
    build_slack, default_candidates, find_complex_balance, lyapunov_certificate, score_conservation_vector,
    suggest_conservation_vector, ComplexBalanceCertificate, ConservationSpec, LyapunovOutcome, ReactionNetwork,
    SlackMode, StructuralMatrices,
};

#[derive(Debug, Serialize)]
pub struct ParseReport {
    pub species: Vec<String>,
    pub complexes: Vec<String>,
    pub reactions: Vec<String>,
    pub matrices: StructuralMatrices,
}

pub fn parse_report(net: &ReactionNetwork) -> ParseReport {
    ParseReport {
        species: net.species_names(),
        complexes: net.complexes().iter().map(|c| net.format_complex(c)).collect(),
        reactions: (0..net.n_reactions()).map(|r| net.format_reaction(r)).collect(),
        matrices: net.matrices(),
    }
}

#[derive(Debug, Serialize)]
pub struct SlackReport {
    #[serde(rename = "W")]
    pub w: Vec<Vec<i64>>,
    #[serde(rename = "N")]
    pub n: Vec<i64>,
    pub u: Vec<i64>,
    pub mode: SlackMode,
    #[serde(rename = "D")]
    pub d: Vec<Vec<i64>>,
    pub scores: Vec<usize>,
    pub network: Vec<String>,
}

/// Builds the slack network; `w = None` picks the suggested vector.
pub fn slack_report(
    net: &ReactionNetwork,
    w: Option<Vec<Vec<i64>>>,
    n: i64,
    u: Option<Vec<i64>>,
    mode: SlackMode,
    x0: Option<&[u32]>,
) -> Result<SlackReport> {
    let w = match w {
        Some(w) => w,
        None => vec![suggest_conservation_vector(net, &default_candidates(net)?)?],
    };
    let mut spec = ConservationSpec { n: vec![n; w.len()], w, u: None, mode };
    if let Some(u) = u {
        spec = spec.with_u(u);
    }
    let snet = build_slack(net, &spec, x0)?;
    let ext = snet.extended_network();
    Ok(SlackReport {
        scores: spec.w.iter().map(|row| score_conservation_vector(net, row)).collect(),
        u: snet.spec().u.clone().unwrap_or_default(),
        w: spec.w,
        n: spec.n,
        mode,
        d: snet.slack_matrix().to_vec(),
        network: (0..ext.n_reactions()).map(|r| ext.format_reaction(r)).collect(),
    })
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub weakly_reversible: bool,
    pub deficiency: usize,
    pub linkage_classes: Vec<Vec<String>>,
    pub complex_balanced: bool,
    pub complex_balance: Option<ComplexBalanceCertificate>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub complex_balance_error: Option<String>,
    pub lyapunov_w: Vec<i64>,
    pub lyapunov: LyapunovOutcome,
}

pub fn check_report(net: &ReactionNetwork, w: Option<Vec<i64>>, x0: Option<&[u32]>) -> Result<CheckReport> {
    let wr = net.weak_reversibility();
    let (complex_balance, complex_balance_error) = match find_complex_balance(net) {
        Ok(c) => (c, None),
        Err(e) => (None, Some(e.to_string())),
    };
    let w = match w {
        Some(w) => w,
        None => suggest_conservation_vector(net, &default_candidates(net)?)?,
    };
    let lyapunov = lyapunov_certificate(net, &w, x0)?;
    Ok(CheckReport {
        weakly_reversible: wr.is_weakly_reversible,
        deficiency: net.deficiency(),
        linkage_classes: wr
            .linkage_classes
            .iter()
            .map(|c| c.iter().map(|&k| net.format_complex(&net.complexes()[k])).collect())
            .collect(),
        complex_balanced: complex_balance.is_some(),
        complex_balance,
        complex_balance_error,
        lyapunov_w: w,
        lyapunov,
    })
}
