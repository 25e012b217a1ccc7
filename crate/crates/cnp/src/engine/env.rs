use std::collections::{BTreeMap, HashMap, HashSet};

use super::options::ControlOptions;
use super::value::Value;

/// One subnet activation: its declared parameter/local names and their
/// current bindings.
#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub subnet: String,
    pub declared: HashSet<String>,
    pub bindings: HashMap<String, Value>,
}

/// Variable bindings: globals plus a stack of subnet activation frames.
/// Lookup resolves innermost-frame-first, then globals.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Environment {
    pub globals: HashMap<String, Value>,
    pub frames: Vec<Frame>,
}

impl Environment {
    pub fn get(&self, name: &str) -> Option<&Value> {
        if let Some(frame) = self.frames.last() {
            if frame.declared.contains(name) {
                return frame.bindings.get(name);
            }
        }
        self.globals.get(name)
    }

    /// True when `name` is a parameter or local of the innermost frame.
    fn is_frame_local(&self, name: &str) -> bool {
        self.frames
            .last()
            .is_some_and(|f| f.declared.contains(name))
    }

    pub fn globals_snapshot(&self) -> BTreeMap<String, Value> {
        self.globals
            .iter()
            .map(|(k, v)| (k.clone(), v.clone()))
            .collect()
    }
}

/// Undo log. Replaying it in reverse restores the exact pre-step environment
/// and control options.
#[derive(Debug, Default)]
pub struct Trail {
    records: Vec<TrailRecord>,
}

#[derive(Debug)]
pub enum TrailRecord {
    Global { name: String, old: Option<Value> },
    FrameLocal { name: String, old: Option<Value> },
    FramePushed,
    FramePopped(Frame),
    Options(ControlOptions),
}

impl Trail {
    pub fn mark(&self) -> usize {
        self.records.len()
    }

    pub fn push(&mut self, record: TrailRecord) {
        self.records.push(record);
    }

    /// Records the overwrite and performs it.
    pub fn set(&mut self, env: &mut Environment, name: &str, value: Value) {
        if env.is_frame_local(name) {
            let frame = env.frames.last_mut().expect("frame exists");
            let old = frame.bindings.insert(name.to_string(), value);
            self.records
                .push(TrailRecord::FrameLocal { name: name.to_string(), old });
        } else {
            let old = env.globals.insert(name.to_string(), value);
            self.records
                .push(TrailRecord::Global { name: name.to_string(), old });
        }
    }

    pub fn push_frame(&mut self, env: &mut Environment, frame: Frame) {
        env.frames.push(frame);
        self.records.push(TrailRecord::FramePushed);
    }

    pub fn pop_frame(&mut self, env: &mut Environment) {
        let frame = env.frames.pop().expect("frame to pop");
        self.records.push(TrailRecord::FramePopped(frame));
    }

    pub fn change_options(&mut self, opts: &mut ControlOptions, new: ControlOptions) {
        let old = std::mem::replace(opts, new);
        self.records.push(TrailRecord::Options(old));
    }

    /// Undoes every record back to `mark`.
    pub fn undo_to(&mut self, mark: usize, env: &mut Environment, opts: &mut ControlOptions) {
        while self.records.len() > mark {
            match self.records.pop().expect("record") {
                TrailRecord::Global { name, old } => match old {
                    Some(v) => {
                        env.globals.insert(name, v);
                    }
                    None => {
                        env.globals.remove(&name);
                    }
                },
                TrailRecord::FrameLocal { name, old } => {
                    let frame = env.frames.last_mut().expect("frame for undo");
                    match old {
                        Some(v) => {
                            frame.bindings.insert(name, v);
                        }
                        None => {
                            frame.bindings.remove(&name);
                        }
                    }
                }
                TrailRecord::FramePushed => {
                    env.frames.pop();
                }
                TrailRecord::FramePopped(frame) => {
                    env.frames.push(frame);
                }
                TrailRecord::Options(old) => {
                    *opts = old;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undo_restores_bindings_and_frames() {
        let mut env = Environment::default();
        let mut opts = ControlOptions::default();
        let mut trail = Trail::default();
        trail.set(&mut env, "x", Value::Int(1));
        let before = env.clone();
        let mark = trail.mark();

        trail.set(&mut env, "x", Value::Int(2));
        trail.set(&mut env, "y", Value::Int(3));
        let mut frame = Frame {
            subnet: "Sub".into(),
            declared: ["p".to_string()].into_iter().collect(),
            bindings: HashMap::new(),
        };
        frame.bindings.insert("p".into(), Value::Int(9));
        trail.push_frame(&mut env, frame);
        trail.set(&mut env, "p", Value::Int(10));
        trail.pop_frame(&mut env);
        let disabled = ControlOptions { backtracking: false, ..opts.clone() };
        trail.change_options(&mut opts, disabled);

        trail.undo_to(mark, &mut env, &mut opts);
        assert_eq!(env, before);
        assert!(opts.backtracking);
    }

    #[test]
    fn frame_locals_shadow_globals() {
        let mut env = Environment::default();
        let mut trail = Trail::default();
        trail.set(&mut env, "x", Value::Int(1));
        let frame = Frame {
            subnet: "Sub".into(),
            declared: ["x".to_string()].into_iter().collect(),
            bindings: HashMap::new(),
        };
        trail.push_frame(&mut env, frame);
        // declared but unbound local hides the global
        assert_eq!(env.get("x"), None);
        trail.set(&mut env, "x", Value::Int(5));
        assert_eq!(env.get("x"), Some(&Value::Int(5)));
        trail.pop_frame(&mut env);
        assert_eq!(env.get("x"), Some(&Value::Int(1)));
    }
}
