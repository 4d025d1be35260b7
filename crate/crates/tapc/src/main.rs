// SPDX-License-Identifier: Apache-2.0

use std::io;

fn main() {
    let code = tapc::run_cli(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    std::process::exit(code);
}
