//! Line-oriented interactive proving.

use qrhl::lang::Settings;
use qrhl::prover::Session;

use crate::{new_session, render_goals};

pub struct Repl {
    pub session: Session,
    buf: String,
}

pub enum Reply {
    /// The command is incomplete; more lines are needed.
    More,
    Output(String),
    Quit,
}

impl Repl {
    pub fn new(settings: Settings) -> Self {
        Repl { session: new_session(settings), buf: String::new() }
    }

    /// Feeds one input line. Commands end with `.`; a failing command
    /// leaves the session as it was.
    pub fn feed(&mut self, line: &str) -> Reply {
        let trimmed = line.trim();
        if self.buf.is_empty() {
            match trimmed {
                "" => return Reply::More,
                "quit" | "exit" => return Reply::Quit,
                "goals" => return Reply::Output(render_goals(&self.session)),
                "undo" => return self.execute("undo."),
                _ => {}
            }
        }
        self.buf.push_str(line);
        self.buf.push('\n');
        if !trimmed.ends_with('.') {
            return Reply::More;
        }
        let text = std::mem::take(&mut self.buf);
        self.execute(&text)
    }

    fn execute(&mut self, text: &str) -> Reply {
        let mut next = self.session.clone();
        match next.run(text) {
            Ok(()) => {
                self.session = next;
                Reply::Output(render_goals(&self.session))
            }
            Err(e) => Reply::Output(format!("error: {e}")),
        }
    }

    /// Discards a partially entered command.
    pub fn reset_input(&mut self) {
        self.buf.clear();
    }
}
