from metis_tap import parallel


def it_chunks_items():
    assert parallel.chunked([1, 2, 3, 4, 5], 2) == [[1, 2], [3, 4], [5]]
    assert parallel.chunked([], 2) == []


def it_maps_in_process_with_one_worker():
    assert parallel.map_chunks(scale_chunk, [1, 2, 3], context={'factor': 2}, workers=1, chunk_size=2) == [2, 4, 6]


def it_keeps_submission_order_across_workers():
    items = list(range(100))

    result = parallel.map_chunks(scale_chunk, items, context={'factor': 3}, workers=4, chunk_size=7)

    assert result == [i * 3 for i in items]


def scale_chunk(context, chunk):
    return [item * context['factor'] for item in chunk]
