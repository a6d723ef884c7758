//! Data-parallel helpers. With the `parallel` feature these fan out over the
//! rayon pool; without it they run the same closures sequentially, so every
//! caller produces identical results either way.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Maps `f` over `items`, preserving order.
pub fn map<T, R, F>(items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}

/// Maps over contiguous chunks, each with its own state from `init`.
/// Output order follows input order.
pub fn map_chunks_with<T, S, R, I, F>(items: &[T], chunk: usize, init: I, f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &T) -> R + Sync + Send,
{
    let chunk = chunk.max(1);
    #[cfg(feature = "parallel")]
    {
        items
            .par_chunks(chunk)
            .flat_map_iter(|part| {
                let mut state = init();
                part.iter().map(|x| f(&mut state, x)).collect::<Vec<_>>()
            })
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items
            .chunks(chunk)
            .flat_map(|part| {
                let mut state = init();
                part.iter().map(|x| f(&mut state, x)).collect::<Vec<_>>()
            })
            .collect()
    }
}

/// Whether this build fans work out to multiple threads.
pub fn enabled() -> bool {
    cfg!(feature = "parallel")
}

/// Worker threads available to `map`.
pub fn threads() -> usize {
    #[cfg(feature = "parallel")]
    {
        rayon::current_num_threads()
    }
    #[cfg(not(feature = "parallel"))]
    {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_preserves_order() {
        let v: Vec<u32> = (0..1000).collect();
        assert_eq!(map(&v, |x| x * 2), v.iter().map(|x| x * 2).collect::<Vec<_>>());
    }

    #[test]
    fn chunked_state_is_per_chunk() {
        let v: Vec<u32> = (0..100).collect();
        let out = map_chunks_with(&v, 7, || 0u32, |seen, &x| {
            *seen += 1;
            (x, *seen)
        });
        for (i, (x, seen)) in out.into_iter().enumerate() {
            assert_eq!(x as usize, i);
            assert_eq!(seen as usize, i % 7 + 1);
        }
    }
}
