package org.example.store;

import java.util.*;
import java.util.function.Function;

/**
 * Inventory { with braces in javadoc }
 */
@SuppressWarnings({"unchecked", "rawtypes"})
public class Inventory<T extends Comparable<T>> implements Iterable<T> {

    private static final String BRACES = "{{ not a block }}";
    private final Map<String, Integer> counts = new HashMap<>();
    private final Comparator<T> order = new Comparator<T>() {
        @Override
        public int compare(T a, T b) { return a.compareTo(b); }
    };
    private Runnable hook = () -> { System.out.println("}"); };

    public Inventory() {
        this(16);
    }

    Inventory(int capacity) {
        if (capacity < 0) { throw new IllegalArgumentException(); }
    }

    static {
        System.setProperty("inventory", "on");
    }

    @Override
    public Iterator<T> iterator() {
        return new ArrayList<T>().iterator();
    }

    public void add(String key, int amount)
            throws IllegalStateException {
        // a comment with a brace {
        counts.merge(key, amount, Integer::sum);
        char open = '{';
        String s = "}";
    }

    public <R> List<R> map(Function<? super T, ? extends R> fn, final List<T> items) {
        List<R> out = new ArrayList<>();
        for (T item : items) {
            out.add(fn.apply(item));
        }
        Runnable r = new Runnable() {
            public void run() {
                out.clear();
            }
        };
        return out;
    }

    int[] histogram(int[][] data) { return new int[0]; }

    protected synchronized boolean remove(String key) {
        switch (key) {
            case "x": { return false; }
            default:
                return counts.remove(key) != null;
        }
    }

    abstract static class Shelf {
        abstract int capacity();

        String label() {
            return "shelf";
        }
    }

    interface Listener {
        void onChange(String key);

        default boolean enabled() { return true; }
    }

    enum Mode {
        FAST { int speed() { return 2; } },
        SLOW;

        int speed() {
            return 1;
        }
    }

    private static String text() {
        return """
            { text block }
            """;
    }

    void log(String msg) { System.out.println(msg); }

    void log(String fmt, Object... args) {
        System.out.println(String.format(fmt, args));
    }

    void log(int level) {
        /* } */
    }
}
