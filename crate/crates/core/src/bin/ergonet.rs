// Copyright 2026 The Ergonet Contributors
// SPDX-License-Identifier: Apache-2.0

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    std::process::exit(ergonet::cli::main_with(std::env::args_os()));
}
