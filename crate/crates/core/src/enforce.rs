//! The PEP enforcement process: obligation discharge, the three
//! enforcement algorithms and the top-level authorisation system.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::sync::{Arc, Mutex};

use crate::ast::{Decision, EnfAlg, InstObligation, ObType, Pas, PdpResponse, SyntacticRequest};
use crate::eval::eval_pdp;
use crate::request::{build_request, ContextProvider};
use crate::value::GroundValue;

/// Receives one line per discharged action.
pub trait DischargeSink: Send + Sync {
    fn record(&self, line: &str);
}

/// Sink that keeps lines in memory; the default.
#[derive(Default)]
pub struct MemorySink(Mutex<Vec<String>>);

impl MemorySink {
    pub fn lines(&self) -> Vec<String> {
        self.0.lock().expect("sink poisoned").clone()
    }
}

impl DischargeSink for MemorySink {
    fn record(&self, line: &str) {
        self.0.lock().expect("sink poisoned").push(line.to_owned());
    }
}

/// Sink appending to a line-oriented text file.
pub struct FileSink(Mutex<std::fs::File>);

impl FileSink {
    pub fn open(path: &std::path::Path) -> std::io::Result<Self> {
        let file = std::fs::OpenOptions::new().create(true).append(true).open(path)?;
        Ok(FileSink(Mutex::new(file)))
    }
}

impl DischargeSink for FileSink {
    fn record(&self, line: &str) {
        let mut f = self.0.lock().expect("sink poisoned");
        let _ = writeln!(f, "{line}");
    }
}

/// An action handler: receives the instantiated arguments and reports
/// whether the discharge succeeded (the ⇓ok predicate). Handlers must be
/// total and deterministic per evaluation run.
pub type ActionHandler = Arc<dyn Fn(&[GroundValue]) -> bool + Send + Sync>;

/// Maps action identifiers to handlers. Unknown actions fail.
pub struct ActionRegistry {
    handlers: HashMap<String, ActionHandler>,
    sink: Arc<dyn DischargeSink>,
}

impl ActionRegistry {
    pub fn new(sink: Arc<dyn DischargeSink>) -> Self {
        ActionRegistry { handlers: HashMap::new(), sink }
    }

    /// The predefined registry: `log` (append to the sink, always
    /// succeeds), `mailTo` (records intent, succeeds) and `compress`
    /// (no-op, succeeds).
    pub fn with_defaults(sink: Arc<dyn DischargeSink>) -> Self {
        let mut reg = ActionRegistry::new(sink);
        reg.register("log", |_| true);
        reg.register("mailTo", |_| true);
        reg.register("compress", |_| true);
        reg
    }

    pub fn register(&mut self, action: &str, handler: impl Fn(&[GroundValue]) -> bool + Send + Sync + 'static) {
        self.handlers.insert(action.to_owned(), Arc::new(handler));
    }

    /// Registry for tests: per-action scripted success/failure, every
    /// other action succeeding or failing per `default_ok`.
    pub fn scripted(outcomes: BTreeMap<String, bool>, default_ok: bool) -> Self {
        let mut reg = ActionRegistry::new(Arc::new(MemorySink::default()));
        for (action, ok) in outcomes {
            reg.register(&action, move |_| ok);
        }
        if default_ok {
            // unknown actions normally fail; a permissive default needs an
            // explicit opt-in through this constructor
            reg.handlers.insert(String::new(), Arc::new(|_| true));
        }
        reg
    }

    fn run(&self, action: &str, args: &[GroundValue]) -> bool {
        match self.handlers.get(action) {
            Some(h) => h(args),
            None => self.handlers.get("").map(|h| h(args)).unwrap_or(false),
        }
    }

    pub fn sink(&self) -> &Arc<dyn DischargeSink> {
        &self.sink
    }
}

impl Default for ActionRegistry {
    fn default() -> Self {
        ActionRegistry::with_defaults(Arc::new(MemorySink::default()))
    }
}

/// One entry of the discharge log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DischargeRecord {
    pub action: String,
    pub args: Vec<GroundValue>,
    pub succeeded: bool,
    pub skipped_optional: bool,
}

/// The enforced decision together with the full discharge log.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnforcedOutcome {
    pub decision: Decision,
    pub discharge_log: Vec<DischargeRecord>,
}

fn args_text(args: &[GroundValue]) -> String {
    args.iter().map(|a| a.to_string()).collect::<Vec<_>>().join(", ")
}

/// Discharges every obligation in order, never short-circuiting, and
/// returns true iff all mandatory discharges succeeded. Optional
/// failures are recorded but ignored.
pub fn discharge(ios: &[InstObligation], reg: &ActionRegistry) -> (bool, Vec<DischargeRecord>) {
    let mut all_mandatory_ok = true;
    let mut log = Vec::with_capacity(ios.len());
    for io in ios {
        let ok = reg.run(&io.action, &io.args);
        let skipped_optional = !ok && io.ob_type == ObType::Optional;
        if !ok && io.ob_type == ObType::Mandatory {
            all_mandatory_ok = false;
        }
        let status = if ok {
            "OK"
        } else if skipped_optional {
            "SKIPPED-OPT"
        } else {
            "FAIL"
        };
        let now = chrono::Utc::now().format("%Y-%m-%dT%H:%M:%SZ");
        reg.sink().record(&format!("{now} {}({}) {status}", io.action, args_text(&io.args)));
        log.push(DischargeRecord {
            action: io.action.clone(),
            args: io.args.clone(),
            succeeded: ok,
            skipped_optional,
        });
    }
    (all_mandatory_ok, log)
}

/// Enforcement algorithm semantics. The obligations carried by a
/// permit/deny response are discharged exactly once; not-app and indet
/// responses carry none.
pub fn enforce(ea: EnfAlg, res: &PdpResponse, reg: &ActionRegistry) -> EnforcedOutcome {
    let (ok, discharge_log) = discharge(res.obligations(), reg);
    let decision = match ea {
        EnfAlg::DenyBiased => {
            if res.decision() == Decision::Permit && ok {
                Decision::Permit
            } else {
                Decision::Deny
            }
        }
        EnfAlg::PermitBiased => {
            if res.decision() == Decision::Deny && ok {
                Decision::Deny
            } else {
                Decision::Permit
            }
        }
        EnfAlg::Base => match res.decision() {
            Decision::Permit if ok => Decision::Permit,
            Decision::Deny if ok => Decision::Deny,
            Decision::NotApp => Decision::NotApp,
            Decision::Indet => Decision::Indet,
            _ => Decision::Indet,
        },
    };
    EnforcedOutcome { decision, discharge_log }
}

/// Top-level semantics: build the semantic request, run the PDP, then
/// enforce the response.
pub fn eval_pas(
    pas: &Pas,
    request: &SyntacticRequest,
    reg: &ActionRegistry,
    provider: Option<Arc<dyn ContextProvider>>,
) -> EnforcedOutcome {
    let mut sem = build_request(request);
    if let Some(p) = provider {
        sem = sem.with_provider(p);
    }
    let res = eval_pdp(&pas.pdp, &sem);
    enforce(pas.enf_alg, &res, reg)
}
