//! JSON rendering of gadget reports. Numbers are exact `p/q` strings.

use serde_json::{json, Value};

use super::gadget::GadgetReport;
use super::ProbeOutcome;
use crate::fairness::Ef1Report;
use crate::model::serialize_profile;
use crate::scalar::{format_rational, Rational};
use crate::Utility;

fn probe_json(p: &ProbeOutcome) -> Value {
    json!({
        "verdict": p.verdict.to_string(),
        "left": p.left.to_string(),
        "right": p.right.to_string(),
        "x": p.point.x().iter().map(format_rational).collect::<Vec<_>>(),
        "k": p.point.k(),
        "i": p.point.i() + 1,
        "backend": p.backend.to_string(),
        "tie_within_tolerance": p.tie_within_tolerance,
    })
}

fn audit_json(r: &Ef1Report<Rational>) -> Value {
    json!({
        "holds": r.holds,
        "violations": r.violations.iter().map(|v| json!({
            "envious": v.envious + 1,
            "envied": v.envied + 1,
            "best_removable": v.best_removable.map(|g| g + 1),
            "residual_envy": v.residual_envy.render(),
        })).collect::<Vec<_>>(),
    })
}

impl GadgetReport {
    /// Pretty-printed JSON document; agents and goods are 1-based.
    pub fn to_document(&self) -> String {
        let profile: Value = serde_json::from_str(&serialize_profile(&self.profile))
            .expect("profile documents are JSON");
        let names = self.profile.good_names();
        let maximizers: Vec<Value> = self
            .maximizer_set
            .members
            .iter()
            .zip(&self.ef1_flags)
            .map(|(m, audit)| {
                json!({
                    "bundles": m.allocation.bundles().iter()
                        .map(|b| b.iter().map(|&g| names[g].clone()).collect::<Vec<_>>())
                        .collect::<Vec<_>>(),
                    "utilities": m.utilities.iter().map(format_rational).collect::<Vec<_>>(),
                    "ef1": audit_json(audit),
                })
            })
            .collect();
        let doc = json!({
            "welfare": self.welfare,
            "spec": {
                "x": self.spec.x().iter().map(format_rational).collect::<Vec<_>>(),
                "k": self.spec.k(),
                "i": self.spec.i() + 1,
                "epsilon": format_rational(self.spec.epsilon()),
                "swapped": self.spec.swapped(),
            },
            "probe": self.probe.as_ref().map(probe_json),
            "profile": profile,
            "welfare_value": self.maximizer_set.welfare_value.to_string(),
            "backend": self.maximizer_set.backend.to_string(),
            "maximizers": maximizers,
            "refuted": self.refuted,
        });
        serde_json::to_string_pretty(&doc).expect("values serialize")
    }
}

#[cfg(test)]
mod tests {
    use crate::lab::{refute_from_probe, ProbePoint};
    use crate::scalar::int;
    use crate::WelfareExpr;

    #[test]
    fn document_embeds_everything() {
        let p = ProbePoint::new(vec![int(1), int(2)], 1, 1).unwrap();
        let report = refute_from_probe(&WelfareExpr::utilitarian(), &p).unwrap();
        let doc: serde_json::Value = serde_json::from_str(&report.to_document()).unwrap();
        assert_eq!(doc["refuted"], true);
        assert_eq!(doc["spec"]["epsilon"], "1/2");
        assert_eq!(doc["probe"]["verdict"], "LEFT_LESS");
        assert_eq!(
            doc["maximizers"][0]["utilities"],
            serde_json::json!(["1/2", "4"])
        );
        assert_eq!(
            doc["maximizers"][0]["bundles"],
            serde_json::json!([["g3"], ["g1", "g2"]])
        );
        assert_eq!(doc["maximizers"][0]["ef1"]["holds"], false);
        assert_eq!(
            doc["profile"]["utilities"][0],
            serde_json::json!(["1", "1", "1/2"])
        );
        assert_eq!(report.to_document(), report.to_document());
    }
}
