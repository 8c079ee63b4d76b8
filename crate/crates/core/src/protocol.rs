//! Honest parties of the identification protocol.
//!
//! Alice holds a [`KeyIssuer`]: her private integers plus the copy and usage
//! counters that enforce the reusability parameter `r`. Bob holds a
//! [`PublicKeyCopy`] and runs [`run_verification`] against any [`Prover`];
//! honest Alice is one prover, the adversary module supplies others.
//!
//! Iteration indices `j` are zero-based throughout.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qla::{measure_povm, phase_gate, CMat, CVec, Povm, PovmElement, QlaError, C64};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("key value {x} outside 1..={max}")]
    KeyOutOfRange { x: u32, max: u32 },
    #[error("all {r} public-key copies have been issued")]
    CopyLimitExceeded { r: u32 },
    #[error("private key already used for {r} runs; refresh the keys")]
    UsageExhausted { r: u32 },
    #[error("qubit {j} of public-key copy {copy_id} was already consumed")]
    QubitConsumed { copy_id: u32, j: usize },
    #[error("public-key copy {copy_id} is not fresh")]
    ConsumedCopy { copy_id: u32 },
    #[error("iteration {j} out of range for s = {s}")]
    IterationOutOfRange { j: usize, s: usize },
    #[error(transparent)]
    Linalg(#[from] QlaError),
}

pub type Result<T> = std::result::Result<T, ProtocolError>;

/// Security parameter `s` (kernel iterations) and reusability parameter `r`
/// (copies in circulation, and runs per private key).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Params {
    pub r: u32,
    pub s: usize,
}

impl Params {
    pub fn new(r: u32, s: usize) -> Result<Self> {
        if r == 0 {
            return Err(ProtocolError::InvalidParams("r must be at least 1".into()));
        }
        if s == 0 {
            return Err(ProtocolError::InvalidParams("s must be at least 1".into()));
        }
        Ok(Self { r, s })
    }

    /// Number of possible private values, `2r + 1`.
    pub fn modulus(&self) -> u32 {
        2 * self.r + 1
    }
}

/// Private phase `2πx/(2r+1)` for key value `x ∈ 1..=2r+1`.
pub fn phase_of(x: u32, r: u32) -> Result<f64> {
    let m = 2 * r + 1;
    if r == 0 || x == 0 || x > m {
        return Err(ProtocolError::KeyOutOfRange { x, max: m });
    }
    Ok(TAU * f64::from(x) / f64::from(m))
}

/// `(|0> + e^{iφ}|1>)/√2`.
pub fn phase_state(phi: f64) -> CVec {
    CVec::new(vec![
        C64::new(FRAC_1_SQRT_2, 0.0),
        C64::from_polar(FRAC_1_SQRT_2, phi),
    ])
    .expect("two amplitudes")
}

/// The `{|+>, |->}` measurement; `+` reports bit 0, `-` reports bit 1.
pub fn pm_povm() -> Povm<u8> {
    let plus = CVec::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).expect("nonempty");
    let minus = CVec::from_real(&[FRAC_1_SQRT_2, -FRAC_1_SQRT_2]).expect("nonempty");
    Povm::new(vec![
        PovmElement {
            outcome: 0,
            op: CMat::projector(&plus),
        },
        PovmElement {
            outcome: 1,
            op: CMat::projector(&minus),
        },
    ])
    .expect("orthonormal basis")
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivateKey {
    pub x: Vec<u32>,
}

impl PrivateKey {
    pub fn validate(&self, params: &Params) -> Result<()> {
        if self.x.len() != params.s {
            return Err(ProtocolError::InvalidParams(format!(
                "key has {} values, expected s = {}",
                self.x.len(),
                params.s
            )));
        }
        let max = params.modulus();
        match self.x.iter().find(|&&x| x == 0 || x > max) {
            Some(&x) => Err(ProtocolError::KeyOutOfRange { x, max }),
            None => Ok(()),
        }
    }
}

/// One copy of the public key: `s` single-qubit states, each usable once.
#[derive(Debug, Clone)]
pub struct PublicKeyCopy {
    copy_id: u32,
    qubits: Vec<CVec>,
    consumed: Vec<bool>,
}

impl PublicKeyCopy {
    pub fn copy_id(&self) -> u32 {
        self.copy_id
    }

    pub fn len(&self) -> usize {
        self.qubits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.qubits.is_empty()
    }

    pub fn is_fresh(&self) -> bool {
        !self.consumed.iter().any(|&c| c)
    }

    pub fn is_consumed(&self, j: usize) -> bool {
        self.consumed.get(j).copied().unwrap_or(true)
    }

    /// Inspects qubit `j` without consuming it. Simulation-only.
    pub fn peek(&self, j: usize) -> Option<&CVec> {
        self.qubits.get(j)
    }

    /// Removes qubit `j` for use in a kernel iteration.
    pub fn take_qubit(&mut self, j: usize) -> Result<CVec> {
        let s = self.qubits.len();
        if j >= s {
            return Err(ProtocolError::IterationOutOfRange { j, s });
        }
        if self.consumed[j] {
            return Err(ProtocolError::QubitConsumed {
                copy_id: self.copy_id,
                j,
            });
        }
        self.consumed[j] = true;
        Ok(self.qubits[j].clone())
    }
}

/// Alice's key material and usage counters.
#[derive(Debug, Clone)]
pub struct KeyIssuer {
    params: Params,
    private: PrivateKey,
    copies_issued: u32,
    alice_runs_used: u32,
}

/// Samples each `x_j` uniformly from `1..=2r+1`.
pub fn keygen<R: Rng + ?Sized>(params: Params, rng: &mut R) -> KeyIssuer {
    let m = params.modulus();
    let x = (0..params.s).map(|_| rng.random_range(1..=m)).collect();
    KeyIssuer {
        params,
        private: PrivateKey { x },
        copies_issued: 0,
        alice_runs_used: 0,
    }
}

impl KeyIssuer {
    /// Rebuilds an issuer from stored key material with fresh counters.
    pub fn from_private(params: Params, private: PrivateKey) -> Result<Self> {
        private.validate(&params)?;
        Ok(Self {
            params,
            private,
            copies_issued: 0,
            alice_runs_used: 0,
        })
    }

    pub fn params(&self) -> Params {
        self.params
    }

    pub fn private_key(&self) -> &PrivateKey {
        &self.private
    }

    pub fn copies_issued(&self) -> u32 {
        self.copies_issued
    }

    pub fn alice_runs_used(&self) -> u32 {
        self.alice_runs_used
    }

    pub fn runs_remaining(&self) -> u32 {
        self.params.r - self.alice_runs_used
    }

    pub fn phase(&self, j: usize) -> Result<f64> {
        let x = *self
            .private
            .x
            .get(j)
            .ok_or(ProtocolError::IterationOutOfRange {
                j,
                s: self.params.s,
            })?;
        phase_of(x, self.params.r)
    }

    pub fn issue_public_key(&mut self) -> Result<PublicKeyCopy> {
        if self.copies_issued >= self.params.r {
            return Err(ProtocolError::CopyLimitExceeded { r: self.params.r });
        }
        let qubits = (0..self.params.s)
            .map(|j| self.phase(j).map(phase_state))
            .collect::<Result<Vec<_>>>()?;
        let copy = PublicKeyCopy {
            copy_id: self.copies_issued,
            consumed: vec![false; qubits.len()],
            qubits,
        };
        self.copies_issued += 1;
        Ok(copy)
    }

    /// Action (i): count one more protocol engagement, or refuse once `r`
    /// engagements have happened with this key.
    pub fn begin_run(&mut self) -> Result<()> {
        if self.alice_runs_used >= self.params.r {
            return Err(ProtocolError::UsageExhausted { r: self.params.r });
        }
        self.alice_runs_used += 1;
        Ok(())
    }

    /// Alice's half of kernel iteration `j`: undo her phase on the received
    /// qubit and measure it in the `{|+>, |->}` basis.
    pub fn respond<R: Rng + ?Sized>(&self, j: usize, qubit: &CVec, rng: &mut R) -> Result<u8> {
        let corrected = phase_gate(-self.phase(j)?).apply(qubit)?;
        Ok(measure_povm(&corrected, &pm_povm(), rng)?)
    }
}

/// Anything that answers Bob's kernel challenges.
pub trait Prover {
    type Error: From<ProtocolError>;

    fn respond<R: Rng + ?Sized>(
        &mut self,
        j: usize,
        challenge: &CVec,
        rng: &mut R,
    ) -> std::result::Result<u8, Self::Error>;
}

/// Honest Alice as a prover. Usage is counted by [`identify`], not here.
pub struct HonestProver<'a>(pub &'a KeyIssuer);

impl Prover for HonestProver<'_> {
    type Error = ProtocolError;

    fn respond<R: Rng + ?Sized>(&mut self, j: usize, challenge: &CVec, rng: &mut R) -> Result<u8> {
        self.0.respond(j, challenge, rng)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KernelRecord {
    pub j: usize,
    pub b: u8,
    pub b_prime: u8,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Accept,
    Reject,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transcript {
    pub copy_id: u32,
    pub records: Vec<KernelRecord>,
    pub verdict: Verdict,
}

impl Transcript {
    fn from_records(copy_id: u32, records: Vec<KernelRecord>) -> Self {
        let verdict = if records.iter().all(|r| r.pass) {
            Verdict::Accept
        } else {
            Verdict::Reject
        };
        Self {
            copy_id,
            records,
            verdict,
        }
    }

    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accept
    }
}

/// Bob's step (1): choose a secret bit and apply `Z^b` to qubit `j` of his copy.
pub fn bob_challenge<R: Rng + ?Sized>(
    copy: &mut PublicKeyCopy,
    j: usize,
    rng: &mut R,
) -> Result<(u8, CVec)> {
    let qubit = copy.take_qubit(j)?;
    let b = u8::from(rng.random_bool(0.5));
    let challenge = if b == 1 {
        phase_gate(std::f64::consts::PI).apply(&qubit)?
    } else {
        qubit
    };
    Ok((b, challenge))
}

/// One kernel iteration between Bob's copy and an arbitrary prover.
pub fn kernel_with<P: Prover, R: Rng + ?Sized>(
    prover: &mut P,
    j: usize,
    copy: &mut PublicKeyCopy,
    rng: &mut R,
) -> std::result::Result<KernelRecord, P::Error> {
    let (b, challenge) = bob_challenge(copy, j, rng)?;
    let b_prime = prover.respond(j, &challenge, rng)?;
    Ok(KernelRecord {
        j,
        b,
        b_prime,
        pass: b == b_prime,
    })
}

/// One honest kernel iteration `K(x_j)`, consuming qubit `j` of `copy`.
pub fn kernel_run<R: Rng + ?Sized>(
    issuer: &KeyIssuer,
    j: usize,
    copy: &mut PublicKeyCopy,
    rng: &mut R,
) -> Result<KernelRecord> {
    kernel_with(&mut HonestProver(issuer), j, copy, rng)
}

/// Bob's side of a full run: `s` kernel iterations against `prover`.
pub fn run_verification<P: Prover, R: Rng + ?Sized>(
    prover: &mut P,
    copy: &mut PublicKeyCopy,
    rng: &mut R,
) -> std::result::Result<Transcript, P::Error> {
    if !copy.is_fresh() {
        return Err(ProtocolError::ConsumedCopy {
            copy_id: copy.copy_id,
        }
        .into());
    }
    let records = (0..copy.len())
        .map(|j| kernel_with(prover, j, copy, rng))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    Ok(Transcript::from_records(copy.copy_id, records))
}

/// Alice identifies herself to the holder of `verifier_copy`.
pub fn identify<R: Rng + ?Sized>(
    issuer: &mut KeyIssuer,
    verifier_copy: &mut PublicKeyCopy,
    rng: &mut R,
) -> Result<Transcript> {
    if !verifier_copy.is_fresh() {
        return Err(ProtocolError::ConsumedCopy {
            copy_id: verifier_copy.copy_id,
        });
    }
    if verifier_copy.len() != issuer.params.s {
        return Err(ProtocolError::InvalidParams(format!(
            "copy has {} qubits, key has s = {}",
            verifier_copy.len(),
            issuer.params.s
        )));
    }
    issuer.begin_run()?;
    run_verification(&mut HonestProver(issuer), verifier_copy, rng)
}

/// Serializable view of a private key.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivateKeyExport {
    pub r: u32,
    pub s: usize,
    pub x: Vec<u32>,
    pub seed: u64,
}

/// Serializable descriptor of an issued public-key copy. Carries no key values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PublicCopyDescriptor {
    pub r: u32,
    pub s: usize,
    pub copy_id: u32,
    pub seed: u64,
}

impl KeyIssuer {
    pub fn export_private(&self, seed: u64) -> PrivateKeyExport {
        PrivateKeyExport {
            r: self.params.r,
            s: self.params.s,
            x: self.private.x.clone(),
            seed,
        }
    }
}

impl PrivateKeyExport {
    pub fn into_issuer(self) -> Result<KeyIssuer> {
        let params = Params::new(self.r, self.s)?;
        KeyIssuer::from_private(params, PrivateKey { x: self.x })
    }
}

impl PublicKeyCopy {
    pub fn descriptor(&self, r: u32, seed: u64) -> PublicCopyDescriptor {
        PublicCopyDescriptor {
            r,
            s: self.len(),
            copy_id: self.copy_id,
            seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;
    use std::f64::consts::PI;

    #[test]
    fn params_validation() {
        assert!(Params::new(0, 3).is_err());
        assert!(Params::new(1, 0).is_err());
        assert_eq!(Params::new(3, 2).unwrap().modulus(), 7);
    }

    #[test]
    fn phase_of_examples() {
        assert!((phase_of(3, 1).unwrap() - 2.0 * PI).abs() < 1e-15);
        assert!((phase_of(1, 1).unwrap() - 2.0 * PI / 3.0).abs() < 1e-15);
        assert!((phase_of(4, 3).unwrap() - 8.0 * PI / 7.0).abs() < 1e-15);
        assert!(matches!(
            phase_of(0, 1),
            Err(ProtocolError::KeyOutOfRange { .. })
        ));
        assert!(matches!(
            phase_of(4, 1),
            Err(ProtocolError::KeyOutOfRange { .. })
        ));
    }

    #[test]
    fn keygen_range_and_determinism() {
        let p = Params::new(1, 3).unwrap();
        let k = keygen(p, &mut substream(1, 0));
        assert!(k.private_key().x.iter().all(|&x| (1..=3).contains(&x)));
        assert_eq!(k.copies_issued(), 0);
        assert_eq!(k.alice_runs_used(), 0);
        let p = Params::new(4, 64).unwrap();
        let a = keygen(p, &mut substream(42, 0));
        let b = keygen(p, &mut substream(42, 0));
        assert_eq!(a.private_key(), b.private_key());
    }

    #[test]
    fn keygen_is_uniform() {
        let p = Params::new(2, 100_000).unwrap();
        let k = keygen(p, &mut substream(7, 0));
        let n = p.s as f64;
        let sigma = (0.2 * 0.8 / n).sqrt();
        for v in 1..=5 {
            let f = k.private_key().x.iter().filter(|&&x| x == v).count() as f64 / n;
            assert!((f - 0.2).abs() <= 4.0 * sigma, "value {v}: {f}");
        }
    }

    #[test]
    fn copy_limit() {
        let mut k = keygen(Params::new(1, 4).unwrap(), &mut substream(1, 0));
        let c = k.issue_public_key().unwrap();
        assert!(c.is_fresh());
        assert!(matches!(
            k.issue_public_key(),
            Err(ProtocolError::CopyLimitExceeded { r: 1 })
        ));
    }

    #[test]
    fn issued_qubits_encode_the_key() {
        let params = Params::new(2, 2).unwrap();
        let mut k = KeyIssuer::from_private(params, PrivateKey { x: vec![1, 5] }).unwrap();
        let c = k.issue_public_key().unwrap();
        let q = c.peek(0).unwrap();
        assert!((q.norm() - 1.0).abs() < 1e-15);
        assert!((q.get(0) - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((q.get(1) - C64::from_polar(FRAC_1_SQRT_2, 2.0 * PI / 5.0)).norm() < 1e-15);
        assert!((c.peek(1).unwrap().get(1) - C64::new(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn honest_kernel_is_deterministic() {
        let mut rng = substream(3, 0);
        for r in 1..=4 {
            let mut k = keygen(Params::new(r, 16).unwrap(), &mut rng);
            let mut c = k.issue_public_key().unwrap();
            for j in 0..16 {
                let rec = kernel_run(&k, j, &mut c, &mut rng).unwrap();
                assert!(rec.pass);
                assert_eq!(rec.b, rec.b_prime);
            }
        }
    }

    #[test]
    fn both_challenge_bits_are_answered() {
        let params = Params::new(3, 1).unwrap();
        let k = KeyIssuer::from_private(params, PrivateKey { x: vec![5] }).unwrap();
        let phi = k.phase(0).unwrap();
        let mut rng = substream(4, 0);
        for b in [0u8, 1] {
            let q = phase_state(phi + f64::from(b) * PI);
            for _ in 0..100 {
                assert_eq!(k.respond(0, &q, &mut rng).unwrap(), b);
            }
        }
    }

    #[test]
    fn qubits_cannot_be_reused() {
        let mut rng = substream(5, 0);
        let mut k = keygen(Params::new(2, 3).unwrap(), &mut rng);
        let mut c = k.issue_public_key().unwrap();
        kernel_run(&k, 1, &mut c, &mut rng).unwrap();
        assert!(c.is_consumed(1));
        assert!(!c.is_consumed(0));
        assert!(matches!(
            kernel_run(&k, 1, &mut c, &mut rng),
            Err(ProtocolError::QubitConsumed { j: 1, .. })
        ));
        assert!(matches!(
            identify(&mut k, &mut c, &mut rng),
            Err(ProtocolError::ConsumedCopy { .. })
        ));
        // The failed identify must not count as a run.
        assert_eq!(k.alice_runs_used(), 0);
    }

    #[test]
    fn identify_accepts_and_counts_runs() {
        let mut rng = substream(6, 0);
        let mut k = keygen(Params::new(1, 12).unwrap(), &mut rng);
        let mut c = k.issue_public_key().unwrap();
        let t = identify(&mut k, &mut c, &mut rng).unwrap();
        assert!(t.accepted());
        assert_eq!(t.records.len(), 12);
        assert_eq!(k.alice_runs_used(), 1);
        let mut fake = k.clone();
        fake.copies_issued = 0;
        let mut c2 = fake.issue_public_key().unwrap();
        assert!(matches!(
            identify(&mut k, &mut c2, &mut rng),
            Err(ProtocolError::UsageExhausted { r: 1 })
        ));
    }

    #[test]
    fn distinct_keys_have_overlap_below_one() {
        for r in 1..=8u32 {
            let m = 2 * r + 1;
            for x in 1..=m {
                for y in (x + 1)..=m {
                    let a = phase_state(phase_of(x, r).unwrap());
                    let b = phase_state(phase_of(y, r).unwrap());
                    let overlap = a.inner(&b).unwrap().norm_sqr();
                    let expected = (PI * f64::from(x as i32 - y as i32) / f64::from(m))
                        .cos()
                        .powi(2);
                    assert!((overlap - expected).abs() < 1e-12);
                    assert!(overlap < 1.0 - 1e-6);
                }
            }
        }
    }

    #[test]
    fn transcript_serializes() {
        let mut rng = substream(8, 0);
        let mut k = keygen(Params::new(2, 3).unwrap(), &mut rng);
        let mut c = k.issue_public_key().unwrap();
        let t = identify(&mut k, &mut c, &mut rng).unwrap();
        let json = serde_json::to_string(&t).unwrap();
        assert!(json.contains("\"verdict\":\"accept\""));
        let back: Transcript = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        let export = k.export_private(99);
        let issuer = export.clone().into_issuer().unwrap();
        assert_eq!(issuer.private_key().x, export.x);
    }
}
