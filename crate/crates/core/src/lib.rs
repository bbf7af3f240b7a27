//! Feedback-driven reproduction of app bug reports.
//!
//! A session hands the whole bug report plus grouped UI context to a chat
//! model, executes the actions it answers with against a device, and feeds the
//! outcomes back until the model declares success or failure, the time limit
//! runs out, or the prompt history can no longer be condensed.

pub mod action;
pub mod agent;
pub mod cli;
pub mod device;
pub mod llm;
pub mod report;
pub mod ui;
