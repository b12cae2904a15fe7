//! Background perception with latest-value semantics: submitting replaces
//! any input still waiting, and the consumer reads the newest finished
//! result without ever waiting for one in flight.

use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread::JoinHandle;

struct Shared<I, O> {
    state: Mutex<State<I, O>>,
    wake: Condvar,
}

struct State<I, O> {
    pending: Option<(u64, I)>,
    latest: Option<(u64, O)>,
    submitted: u64,
    /// Inputs replaced before the worker picked them up.
    dropped: u64,
    shutdown: bool,
}

fn lock<T>(m: &Mutex<T>) -> MutexGuard<'_, T> {
    m.lock().unwrap_or_else(|e| e.into_inner())
}

pub struct PerceptionWorker<I, O> {
    shared: Arc<Shared<I, O>>,
    handle: Option<JoinHandle<()>>,
}

impl<I, O> PerceptionWorker<I, O>
where
    I: Send + 'static,
    O: Clone + Send + 'static,
{
    pub fn spawn<F>(mut process: F) -> Self
    where
        F: FnMut(I) -> O + Send + 'static,
    {
        let shared = Arc::new(Shared {
            state: Mutex::new(State {
                pending: None,
                latest: None,
                submitted: 0,
                dropped: 0,
                shutdown: false,
            }),
            wake: Condvar::new(),
        });
        let worker = Arc::clone(&shared);
        let handle = std::thread::spawn(move || loop {
            let (seq, input) = {
                let mut st = lock(&worker.state);
                loop {
                    if st.shutdown {
                        return;
                    }
                    if let Some(job) = st.pending.take() {
                        break job;
                    }
                    st = worker.wake.wait(st).unwrap_or_else(|e| e.into_inner());
                }
            };
            let output = process(input);
            let mut st = lock(&worker.state);
            st.latest = Some((seq, output));
            worker.wake.notify_all();
        });
        Self {
            shared,
            handle: Some(handle),
        }
    }

    /// Queues `input`, replacing an input not yet started. Returns its
    /// sequence number, starting at 1.
    pub fn submit(&self, input: I) -> u64 {
        let mut st = lock(&self.shared.state);
        st.submitted += 1;
        let seq = st.submitted;
        if st.pending.replace((seq, input)).is_some() {
            st.dropped += 1;
        }
        self.shared.wake.notify_all();
        seq
    }

    /// The newest completed result and the sequence number of its input.
    pub fn latest(&self) -> Option<(u64, O)> {
        lock(&self.shared.state).latest.clone()
    }

    pub fn dropped(&self) -> u64 {
        lock(&self.shared.state).dropped
    }

    /// Blocks until the result for input `seq` or a newer one is available.
    pub fn wait_for(&self, seq: u64) -> (u64, O) {
        let mut st = lock(&self.shared.state);
        loop {
            if let Some((done, out)) = &st.latest {
                if *done >= seq {
                    return (*done, out.clone());
                }
            }
            st = self.shared.wake.wait(st).unwrap_or_else(|e| e.into_inner());
        }
    }
}

impl<I, O> Drop for PerceptionWorker<I, O> {
    fn drop(&mut self) {
        lock(&self.shared.state).shutdown = true;
        self.shared.wake.notify_all();
        if let Some(h) = self.handle.take() {
            let _ = h.join();
        }
    }
}
