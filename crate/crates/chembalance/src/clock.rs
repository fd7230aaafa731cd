//! Per-thread CPU clock.
//!
//! Busy-time accounting must survive preemption: on an oversubscribed
//! machine a wall clock charges a worker for time it spent descheduled,
//! which destroys the imbalance measurement. `CLOCK_THREAD_CPUTIME_ID`
//! charges only the CPU time the calling thread actually consumed.

/// CPU seconds consumed by the calling thread since an arbitrary origin.
pub fn thread_cpu_seconds() -> f64 {
    let mut ts = libc::timespec { tv_sec: 0, tv_nsec: 0 };
    let rc = unsafe { libc::clock_gettime(libc::CLOCK_THREAD_CPUTIME_ID, &mut ts) };
    assert_eq!(rc, 0, "clock_gettime failed");
    ts.tv_sec as f64 + ts.tv_nsec as f64 * 1e-9
}
