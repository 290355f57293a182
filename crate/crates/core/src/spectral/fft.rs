//! Cached FFT plans and multi-dimensional transforms over row-major cubes.

use std::any::{Any, TypeId};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use ndarray::{ArrayViewMut, Axis, IxDyn, Zip};
use num_complex::Complex;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::scalar::Real;

type PlanKey = (TypeId, usize, bool);

fn plan_cache() -> &'static Mutex<HashMap<PlanKey, Arc<dyn Any + Send + Sync>>> {
    static CACHE: OnceLock<Mutex<HashMap<PlanKey, Arc<dyn Any + Send + Sync>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn plan<T: Real>(len: usize, inverse: bool) -> Arc<dyn Fft<T>> {
    let key = (TypeId::of::<T>(), len, inverse);
    let mut cache = plan_cache().lock().expect("fft plan cache poisoned");
    if let Some(entry) = cache.get(&key) {
        if let Some(plan) = entry.downcast_ref::<Arc<dyn Fft<T>>>() {
            return Arc::clone(plan);
        }
    }
    let mut planner = FftPlanner::<T>::new();
    let plan = if inverse {
        planner.plan_fft_inverse(len)
    } else {
        planner.plan_fft_forward(len)
    };
    cache.insert(key, Arc::new(Arc::clone(&plan)));
    plan
}

// Below this many points the transform runs on the calling thread.
const PARALLEL_THRESHOLD: usize = 1 << 14;

/// Unnormalized in-place transform of a `len^dim` cube stored row-major.
///
/// Each 1D line is transformed independently, so results do not depend on
/// how lines are distributed over threads.
pub(crate) fn transform<T: Real>(data: &mut [Complex<T>], len: usize, dim: usize, inverse: bool) {
    debug_assert_eq!(data.len(), len.pow(dim as u32));
    let fft = plan::<T>(len, inverse);
    let parallel = data.len() >= PARALLEL_THRESHOLD;

    // contiguous last axis
    let scratch_len = fft.get_inplace_scratch_len();
    if parallel {
        data.par_chunks_mut(len).for_each_init(
            || vec![Complex::new(T::zero(), T::zero()); scratch_len],
            |scratch, line| fft.process_with_scratch(line, scratch),
        );
    } else {
        let mut scratch = vec![Complex::new(T::zero(), T::zero()); scratch_len];
        for line in data.chunks_mut(len) {
            fft.process_with_scratch(line, &mut scratch);
        }
    }
    if dim == 1 {
        return;
    }

    let shape = vec![len; dim];
    let mut view = ArrayViewMut::from_shape(IxDyn(&shape), data).expect("cube shape");
    for axis in 0..dim - 1 {
        let lanes = Zip::from(view.lanes_mut(Axis(axis)));
        let run = |mut lane: ndarray::ArrayViewMut1<Complex<T>>| {
            let mut buf = lane.to_vec();
            fft.process(&mut buf);
            for (dst, src) in lane.iter_mut().zip(buf) {
                *dst = src;
            }
        };
        if parallel {
            lanes.par_for_each(run);
        } else {
            lanes.for_each(run);
        }
    }
}
