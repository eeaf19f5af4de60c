//! Query a black box through the SEQBOX/1 line protocol.
//!
//! A server thread exposes an automaton on a local TCP port; the client side
//! connects like it would to any external model and runs an extraction
//! through the connection.
//!
//! Run with `cargo run --example seqbox_loopback`.

use std::net::TcpListener;
use std::sync::Arc;
use std::thread;

use wa_distill::fixtures::two_state_pfa;
use wa_distill::oracle::server::serve_tcp;
use wa_distill::oracle::{external_oracle, wa_oracle, BlackBox, Endpoint};
use wa_distill::spectral::{extract, ExtractionConfig};
use wa_distill::Result;

fn main() -> Result<()> {
    let listener = TcpListener::bind("127.0.0.1:0")?;
    let addr = listener.local_addr()?;
    let model: Arc<dyn BlackBox> = Arc::new(wa_oracle(two_state_pfa()));
    thread::spawn(move || serve_tcp(model, listener));

    let remote = external_oracle(&Endpoint::Tcp(addr.to_string()), None)?;
    println!(
        "connected to {addr}: alphabet size {}, {:?}",
        remote.alphabet().size(),
        remote.capabilities()
    );
    println!("score(ab) = {}", remote.score(&[0, 1])?);
    let dist = remote.next_dist(&[0])?;
    println!("next after a = {:?}", dist.probs());

    let (wa, report) = extract(&remote, &ExtractionConfig::new(40, 40, 2, 5, 1))?;
    println!(
        "extracted {} states from {} remote queries; f(ab) = {:.12}",
        wa.num_states(),
        report.queries,
        wa.evaluate(&[0, 1])?
    );
    Ok(())
}
