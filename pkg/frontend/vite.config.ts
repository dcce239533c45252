import { defineConfig } from 'vite'

// The built bundle is served by the Python session service under /ui, so
// assets resolve relative to that mount.
export default defineConfig({
    base: './',
    build: {
        outDir: '../src/privleak/service/static',
        emptyOutDir: true,
    },
    server: {
        proxy: {
            '/rules': 'http://127.0.0.1:8099',
            '/sessions': 'http://127.0.0.1:8099',
            '/reports': 'http://127.0.0.1:8099',
        },
    },
})
