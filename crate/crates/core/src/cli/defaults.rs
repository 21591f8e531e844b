//! Configs used when a subcommand runs without `--config`.

use super::config::{Kind, ProtocolName};

/// Ready-to-run config text for `kind`; the seed still has to come from
/// the command line.
pub fn default_config(kind: Kind, protocol: Option<ProtocolName>) -> String {
    let body = match kind {
        Kind::Entropy => "[fixture]\nstate = werner(0.8)\n[grid]\nalpha = 0.5, 1.5, 2\ndtype = both\n",
        Kind::Theta => "[fixture]\nmap = depolarizing(0.5)\n[grid]\ndim = 2, 3, 4\n",
        Kind::TwirlCheck => "[grid]\ndim = 2, 3\nensemble = clifford, haar\n[mc]\nsamples = 2000\n",
        Kind::Decouple => {
            "[fixture]\nstate = random(2,2,2)\nmap = compressive(1)\n[grid]\nalpha = 1.25, 1.5, 2\nn = 1, 2, 3, 4\n[mc]\nsamples = 1000\n"
        }
        Kind::Sweep => "[fixture]\nstate = werner(0.8)\nmap = compressive(1)\n[grid]\nalpha = 1.25, 1.5, 2\nn = 1, 2, 3, 4, 5, 6\n",
        Kind::Protocol => match protocol.unwrap_or(ProtocolName::Schumacher) {
            ProtocolName::Schumacher => {
                "[fixture]\nstate = source(0.9)\n[grid]\nn = 1, 2, 3, 4, 5, 6\nrate_gap = 0.15\n[protocol]\nname = schumacher\n"
            }
            ProtocolName::Fqsw => "[fixture]\nstate = ghz\n[grid]\nn = 1, 2\ndim = 1, 2\n[protocol]\nname = fqsw\ndim_a1 = 1\n",
            ProtocolName::Merge => "[fixture]\nstate = ghz\n[grid]\nn = 1, 2\ndim = 2\n[protocol]\nname = merge\ndim_a0 = 1\ndim_a1 = 1\n",
            ProtocolName::Destroy => "[fixture]\nstate = classical_pair\n[grid]\nn = 2\nm = 1, 2, 4, 8, 16\n[protocol]\nname = destroy\n",
        },
    };
    format!("[run]\nkind = {}\n{body}", kind.name())
}
